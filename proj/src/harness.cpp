#include "lcapprox/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "lcapprox/calibration.hpp"
#include "lcapprox/compactness.hpp"
#include "lcapprox/conv_op.hpp"
#include "lcapprox/error.hpp"
#include "lcapprox/finite_rank.hpp"
#include "lcapprox/test_family.hpp"

namespace lcapprox {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Tolerances

Tolerances Tolerances::scaled(double factor) const {
  Tolerances t = *this;
  t.step1 *= factor;
  t.monotone_slack *= factor;
  t.forms_unimodular *= factor;
  t.forms_affine *= factor;
  t.step2 *= factor;
  t.full_rank *= factor;
  t.rank_bound *= factor;
  t.calibration_accept *= factor;
  t.mollifier_mass *= factor;
  return t;
}

ordered_json Tolerances::to_json() const {
  return ordered_json{{"step1", step1},
                      {"monotone_slack", monotone_slack},
                      {"forms_unimodular", forms_unimodular},
                      {"forms_affine", forms_affine},
                      {"step2", step2},
                      {"full_rank", full_rank},
                      {"rank_bound", rank_bound},
                      {"calibration_accept", calibration_accept},
                      {"calibration_reject", calibration_reject},
                      {"mollifier_mass", mollifier_mass}};
}

// ---------------------------------------------------------------------------
// Config parsing

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Calibrate: return "calibrate";
    case ExperimentKind::Converge: return "converge";
    case ExperimentKind::Rank: return "rank";
    case ExperimentKind::Compactness: return "compactness";
    case ExperimentKind::Forms: return "forms";
  }
  return "?";
}

Group ExperimentConfig::make_group() const {
  Group g = Group::parse(group);
  if (modular_exponent && g.kind() == GroupKind::AffinePos) {
    g = Group::affine({g.conventions().density_exponent, *modular_exponent});
  }
  return g;
}

namespace {

ExperimentKind parse_kind(const std::string& s) {
  for (ExperimentKind k : {ExperimentKind::Calibrate, ExperimentKind::Converge, ExperimentKind::Rank,
                           ExperimentKind::Compactness, ExperimentKind::Forms}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("key 'experiment': unknown experiment '" + s + "'");
}

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
  throw ConfigError("key '" + key + "': " + what);
}

template <typename T>
T get_as(const ordered_json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_key(key, "wrong type (" + std::string(j.type_name()) + ")");
  }
}

double get_number(const ordered_json& j, const std::string& key) {
  if (!j.is_number()) bad_key(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad_key(key, "must be finite");
  return v;
}

int get_int(const ordered_json& j, const std::string& key) {
  if (!j.is_number_integer()) bad_key(key, "expected an integer");
  return j.get<int>();
}

std::vector<double> get_numbers(const ordered_json& j, const std::string& key) {
  if (!j.is_array()) bad_key(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_number(j[i], key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Interval get_interval(const ordered_json& j, const std::string& key) {
  const auto v = get_numbers(j, key);
  if (v.size() != 2 || !(v[0] <= v[1])) bad_key(key, "expected [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

QuadRule parse_rule(const ordered_json& j) {
  if (!j.is_object()) bad_key("rule", "expected an object");
  QuadRule rule;
  for (const auto& [k, v] : j.items()) {
    const std::string key = "rule." + k;
    if (k == "scheme") {
      try {
        rule.scheme = parse_scheme(get_as<std::string>(v, key));
      } catch (const Error& e) {
        bad_key(key, e.what());
      }
    } else if (k == "panels") {
      rule.panels = get_int(v, key);
    } else if (k == "points") {
      rule.points = get_int(v, key);
    } else {
      bad_key(key, "unknown key");
    }
  }
  try {
    rule.validate();
  } catch (const Error& e) {
    bad_key("rule", e.what());
  }
  return rule;
}

CompactRegion parse_region(const ordered_json& j, int dim) {
  if (!j.is_object()) bad_key("K", "expected an object with axis intervals");
  std::vector<Interval> axes;
  static const char* const names[] = {"x", "y"};
  for (const auto& [k, v] : j.items()) {
    if (k != "x" && k != "y") bad_key("K." + k, "unknown key (axes are 'x' and 'y')");
  }
  for (int i = 0; i < dim; ++i) {
    const std::string name = names[i];
    if (!j.contains(name)) bad_key("K." + name, "missing axis interval");
    axes.push_back(get_interval(j.at(name), "K." + name));
  }
  if (dim == 1 && j.contains("y")) bad_key("K.y", "group has one coordinate");
  return dim == 1 ? CompactRegion(axes[0]) : CompactRegion(axes[0], axes[1]);
}

void parse_mollifier(const ordered_json& j, ExperimentConfig& c, const std::string& prefix) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix + k;
    if (k == "profile") {
      try {
        c.profile = parse_profile(get_as<std::string>(v, key));
      } catch (const Error& e) {
        bad_key(key, e.what());
      }
    } else if (k == "radius") {
      c.radius = get_number(v, key);
      if (!(c.radius > 0.0)) bad_key(key, "must be positive");
    } else if (!prefix.empty()) {
      bad_key(key, "unknown key");
    }
  }
}

bool is_mollifier_key(const std::string& k) { return k == "profile" || k == "radius"; }

}  // namespace

ExperimentConfig parse_config(const ordered_json& j, std::string_view default_name) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c;
  c.source = j;
  c.name = std::string(default_name);
  if (!j.contains("experiment")) bad_key("experiment", "missing");

  std::optional<ordered_json> region_json;
  for (const auto& [k, v] : j.items()) {
    if (k == "experiment") {
      c.experiment = parse_kind(get_as<std::string>(v, k));
    } else if (k == "name" || k == "output") {
      const auto s = get_as<std::string>(v, k);
      if (s.empty()) bad_key(k, "must not be empty");
      if (k == "output" || !j.contains("output")) c.name = s;  // "output" wins
    } else if (k == "group") {
      c.group = get_as<std::string>(v, k);
    } else if (k == "modular_exponent") {
      c.modular_exponent = get_int(v, k);
    } else if (k == "mollifier") {
      if (!v.is_object()) bad_key(k, "expected {\"profile\": ..., \"radius\": ...}");
      parse_mollifier(v, c, "mollifier.");
    } else if (is_mollifier_key(k)) {
      parse_mollifier(ordered_json{{k, v}}, c, "");
    } else if (k == "radii") {
      c.radii = get_numbers(v, k);
    } else if (k == "ranks") {
      if (!v.is_array()) bad_key(k, "expected an array of integers");
      for (std::size_t i = 0; i < v.size(); ++i) c.ranks.push_back(get_int(v[i], k + "[" + std::to_string(i) + "]"));
    } else if (k == "tolerance") {
      c.tolerance = get_number(v, k);
      if (!(*c.tolerance > 0.0)) bad_key(k, "must be positive");
    } else if (k == "family") {
      c.family = get_as<std::string>(v, k);
    } else if (k == "K") {
      region_json = v;
    } else if (k == "grid") {
      c.grid = get_int(v, k);
      if (c.grid < 2) bad_key(k, "must be at least 2");
    } else if (k == "rule") {
      c.rule = parse_rule(v);
    } else if (k == "epsilon") {
      c.epsilons = {get_number(v, k)};
    } else if (k == "epsilons") {
      c.epsilons = get_numbers(v, k);
    } else if (k == "modulus_radius") {
      c.modulus_radius = get_number(v, k);
      if (!(c.modulus_radius > 0.0)) bad_key(k, "must be positive");
    } else if (k == "max_doublings") {
      c.max_doublings = get_int(v, k);
      if (c.max_doublings < 1 || c.max_doublings > 12) bad_key(k, "must lie in 1..12");
    } else if (k == "seed") {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        bad_key(k, "expected a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else {
      bad_key(k, "unknown key");
    }
  }

  Group g = Group::real_line();
  try {
    g = c.make_group();
  } catch (const Error& e) {
    bad_key("group", e.what());
  }
  if (region_json) c.region = parse_region(*region_json, g.dimension());

  if (c.family != "all") {
    const auto names = catalog_names();
    const std::string base = c.family.substr(0, c.family.find('/'));
    if (std::find(names.begin(), names.end(), base) == names.end()) {
      bad_key("family", "unknown catalog family '" + c.family + "'");
    }
  }
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] > 0.0)) bad_key("radii", "radii must be positive");
    if (i > 0 && !(c.radii[i] < c.radii[i - 1])) bad_key("radii", "radii must be strictly descending");
  }
  for (std::size_t i = 0; i < c.ranks.size(); ++i) {
    if (c.ranks[i] < 1) bad_key("ranks", "ranks must be positive");
    if (i > 0 && !(c.ranks[i] > c.ranks[i - 1])) bad_key("ranks", "ranks must be strictly ascending");
  }
  if (c.tolerance && !c.ranks.empty()) bad_key("tolerance", "give either 'ranks' or 'tolerance'");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0)) bad_key("epsilons", "epsilon must be positive");
    if (i > 0 && !(c.epsilons[i] > c.epsilons[i - 1])) bad_key("epsilons", "epsilons must be strictly ascending");
  }
  if (c.experiment == ExperimentKind::Calibrate && g.kind() != GroupKind::AffinePos) {
    bad_key("group", "calibration applies to the affine group only");
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON parse error: " + e.what());
  }
  try {
    return parse_config(j, path.stem().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Running experiments

bool ExperimentResult::passed() const {
  if (config_error) return false;
  return std::all_of(contracts.begin(), contracts.end(), [](const Contract& c) { return c.passed; });
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Deterministic uniform [0, 1) doubles; independent of the standard
/// library's distribution implementations.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 rng_;
};

class Recorder {
 public:
  explicit Recorder(ExperimentResult& r) : r_(r) {}

  void check(const std::string& name, bool ok, const std::string& detail) {
    r_.contracts.push_back({name, ok, detail});
  }
  /// value <= bound
  void at_most(const std::string& name, double value, double bound, const std::string& where = "") {
    const bool ok = std::isfinite(value) && value <= bound;
    check(name, ok, (where.empty() ? "" : where + ": ") + num(value) + " <= " + num(bound));
  }
  void at_least(const std::string& name, double value, double bound, const std::string& where = "") {
    const bool ok = std::isfinite(value) && value >= bound;
    check(name, ok, (where.empty() ? "" : where + ": ") + num(value) + " >= " + num(bound));
  }

 private:
  ExperimentResult& r_;
};

/// Columns must be free of NaN/Inf.
void check_finite(Recorder& rec, const ExperimentResult& r) {
  for (const Table& t : r.tables) {
    bool ok = true;
    for (const auto& row : t.rows) {
      for (double v : row) ok = ok && std::isfinite(v);
    }
    rec.check("finite-values" + (t.suffix.empty() ? "" : ":" + t.suffix), ok,
              std::to_string(t.rows.size()) + " rows");
  }
}

/// Column `col` non-increasing with slack.
void check_non_increasing(Recorder& rec, const std::string& name, const Table& t, std::size_t col,
                          double slack) {
  bool ok = true;
  std::string detail = "non-increasing within " + num(slack);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    if (t.rows[i][col] > t.rows[i - 1][col] + slack) {
      ok = false;
      detail = "row " + std::to_string(i) + ": " + num(t.rows[i][col]) + " > " + num(t.rows[i - 1][col]);
      break;
    }
  }
  rec.check(name, ok, detail);
}

TestFamily resolve_family(const ExperimentConfig& c, const Group& g) {
  if (const auto slash = c.family.find('/'); slash != std::string::npos) {
    TestFamily fam = catalog_family(c.family.substr(0, slash), g);
    const std::string member = c.family.substr(slash + 1);
    std::erase_if(fam.members, [&](const TestFunction& f) { return f.name != member; });
    if (fam.members.empty()) throw ConfigError("key 'family': no member '" + member + "' on " + g.id());
    fam.name = c.family;
    return fam;
  }
  if (c.family != "all") return catalog_family(c.family, g);
  TestFamily all{"all", {}, default_region(g)};
  for (const auto& name : catalog_names()) {
    auto fam = catalog_family(name, g);
    for (auto& m : fam.members) {
      m.name = name + "/" + m.name;
      all.members.push_back(std::move(m));
    }
  }
  return all;
}

std::vector<double> default_radii(const Group& g) {
  if (g.discrete()) return {3.5, 2.5, 1.5, 0.5};
  return {0.4, 0.2, 0.1, 0.05};
}

int resolve_grid(const ExperimentConfig& c, const Group& g) {
  if (c.grid > 0) return c.grid;
  const bool affine = g.dimension() == 2;
  switch (c.experiment) {
    case ExperimentKind::Converge: return affine ? 17 : default_grid(g);
    case ExperimentKind::Forms: return affine ? 9 : 65;
    case ExperimentKind::Compactness: return affine ? 9 : 65;
    case ExperimentKind::Rank: return affine ? 9 : 64;
    case ExperimentKind::Calibrate: return 5;
  }
  return default_grid(g);
}

ordered_json region_json(const CompactRegion& r) {
  ordered_json j;
  j["x"] = {r.axis(0).lo, r.axis(0).hi};
  if (r.dim() == 2) j["y"] = {r.axis(1).lo, r.axis(1).hi};
  return j;
}

double forms_tolerance(const Group& g, const Tolerances& tol) {
  return g.unimodular() ? tol.forms_unimodular : tol.forms_affine;
}

/// Random points around the identity inside a box of the given half-width.
GroupPoint random_near_identity(const Group& g, double half_width, Uniform& u) {
  const GroupPoint e = g.identity();
  if (g.discrete()) {
    const double m = std::ceil(half_width) + 1.0;
    return g.reduce(GroupPoint(std::floor(u(-m, m + 1.0))));
  }
  if (g.dimension() == 2) return GroupPoint(u(e[0] - half_width, e[0] + half_width), u(-half_width, half_width));
  return g.reduce(GroupPoint(u(-half_width, half_width)));
}

/// Nonnegativity and support on 10^3 random samples, plus unit mass.
void check_mollifier_axioms(Recorder& rec, const Mollifier& m, const QuadRule& rule,
                            const Tolerances& tol, Uniform& u) {
  const Group& g = m.group();
  const double r = m.radius();
  double half = 1.5 * r;
  if (g.kind() == GroupKind::AffinePos) half = std::min(half, 0.5 * (1.0 + r));
  if (g.kind() == GroupKind::Circle) half = std::min(half, 3.14159);
  double min_value = 0.0, outside_max = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GroupPoint x = random_near_identity(g, half, u);
    const double v = m.eval(x);
    min_value = std::min(min_value, v);
    if (g.distance_to_identity(x) >= r) {
      outside_max = std::max(outside_max, std::abs(v));
    }
  }
  const std::string where = "radius " + num(r);
  rec.at_least("mollifier-nonnegative", min_value, 0.0, where);
  rec.at_most("mollifier-support", outside_max, 0.0, where);
  const auto nodes = m.support_nodes(rule.refined());
  const double mass = integrate_nodes([&](const GroupPoint& x) { return m.eval(x); }, nodes);
  rec.at_most("mollifier-unit-mass", std::abs(mass - 1.0), tol.mollifier_mass, where);
}

// --- experiment bodies ------------------------------------------------------

void run_converge(const ExperimentConfig& c, const Group& g, const Tolerances& tol,
                  ExperimentResult& out, Recorder& rec, ordered_json& resolved) {
  const TestFamily fam = resolve_family(c, g);
  const CompactRegion region = c.region.value_or(fam.region);
  const auto radii = c.radii.empty() ? default_radii(g) : c.radii;
  const int grid = resolve_grid(c, g);
  resolved["K"] = region_json(region);
  resolved["radii"] = radii;
  resolved["grid"] = grid;

  Uniform u(c.seed);
  for (double r : radii) check_mollifier_axioms(rec, Mollifier::build(g, c.profile, r, c.rule), c.rule, tol, u);

  const auto rows = convergence_sweep(g, c.profile, radii, fam, region, grid, c.rule);
  Table t{"", {"radius", "sup_error", "modulus_bound"}, {}};
  for (const auto& row : rows) {
    t.rows.push_back({row.radius, row.sup_error, row.modulus_bound});
    rec.at_most("step1-chain", row.sup_error, row.modulus_bound + tol.step1, "radius " + num(row.radius));
  }
  check_non_increasing(rec, "sup-error-non-increasing", t, 1, tol.monotone_slack);
  out.tables.push_back(std::move(t));
}

void run_forms(const ExperimentConfig& c, const Group& g, const Tolerances& tol, ExperimentResult& out,
               Recorder& rec, ordered_json& resolved) {
  const TestFamily fam = resolve_family(c, g);
  const CompactRegion region = c.region.value_or(fam.region);
  const auto radii = c.radii.empty() ? default_radii(g) : c.radii;
  const int grid = resolve_grid(c, g);
  const double bound = forms_tolerance(g, tol);
  resolved["K"] = region_json(region);
  resolved["radii"] = radii;
  resolved["grid"] = grid;
  resolved["modular_exponent"] = g.kind() == GroupKind::AffinePos ? ordered_json(g.conventions().modular_exponent)
                                                                   : ordered_json(nullptr);

  const auto points = grid_points(g, region, grid);
  Table t{"", {"radius", "discrepancy"}, {}};
  for (double r : radii) {
    const ConvOperator op(Mollifier::build(g, c.profile, r, c.rule), c.rule);
    const double d = forms_agree(op, fam, points);
    t.rows.push_back({r, d});
    rec.at_most("forms-agree", d, bound, "radius " + num(r));
  }
  out.tables.push_back(std::move(t));
}

void run_rank(const ExperimentConfig& c, const Group& g, const Tolerances& tol, ExperimentResult& out,
              Recorder& rec, ordered_json& resolved) {
  const TestFamily fam = resolve_family(c, g);
  const CompactRegion region = c.region.value_or(fam.region);
  const int grid = resolve_grid(c, g);
  const ConvOperator op(Mollifier::build(g, c.profile, c.radius, c.rule), c.rule);

  const KernelSample sample = sample_kernel(op, region, grid);
  const int full = static_cast<int>(std::min(sample.matrix.rows(), sample.matrix.cols()));
  std::vector<int> ranks = c.ranks;
  if (c.tolerance) {
    ranks = {low_rank_factor(sample, ToleranceTarget{*c.tolerance}).rank()};
  } else if (ranks.empty()) {
    for (int n = 1; n < full; n *= 2) ranks.push_back(n);
    ranks.push_back(full);
  }
  resolved["K"] = region_json(region);
  resolved["grid"] = grid;
  resolved["radius"] = c.radius;
  resolved["ranks"] = ranks;
  resolved["sample_shape"] = {sample.matrix.rows(), sample.matrix.cols()};

  const auto rows = rank_error_sweep(op, region, grid, ranks, fam);
  Table t{"", {"rank", "sup_error", "discarded_mass"}, {}};
  Table b{"bound", {"rank", "sup_error", "certified_bound"}, {}};
  for (const auto& row : rows) {
    t.rows.push_back({static_cast<double>(row.rank), row.sup_error, row.discarded_mass});
    b.rows.push_back({static_cast<double>(row.rank), row.sup_error, row.bound});
    const std::string where = "rank " + std::to_string(row.rank);
    rec.at_most("rank-certified-bound", row.sup_error, row.bound + tol.rank_bound, where);
    if (row.rank >= full) rec.at_most("full-rank-exact", row.sup_error, tol.full_rank, where);
  }
  check_non_increasing(rec, "rank-error-non-increasing", t, 1, tol.monotone_slack);
  check_non_increasing(rec, "discarded-mass-non-increasing", t, 2, tol.monotone_slack);
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(b));
}

/// Midpoints of neighbouring radii (descending input).
std::vector<double> midpoints(const std::vector<double>& radii) {
  std::vector<double> out;
  for (std::size_t i = 1; i < radii.size(); ++i) out.push_back(0.5 * (radii[i - 1] + radii[i]));
  return out;
}

/// Starting radius set of the compactness experiment.
std::vector<double> compactness_radii(const Group& g) {
  return default_radii(g);
}

/// Per radius: the grid samples of P^U f for every member, concatenated.
std::vector<std::vector<double>> family_orbit(const Group& g, const ExperimentConfig& c,
                                              const std::vector<double>& radii, const TestFamily& fam,
                                              const CompactRegion& region, int grid) {
  std::vector<std::vector<double>> out(radii.size());
  for (const TestFunction& fn : fam.members) {
    const auto orbit = operator_orbit(g, c.profile, radii, fn, region, grid, c.rule);
    for (std::size_t i = 0; i < radii.size(); ++i) out[i].insert(out[i].end(), orbit[i].begin(), orbit[i].end());
  }
  return out;
}

void run_compactness(const ExperimentConfig& c, const Group& g, const Tolerances& tol,
                     ExperimentResult& out, Recorder& rec, ordered_json& resolved) {
  const TestFamily fam = resolve_family(c, g);
  const CompactRegion region = c.region.value_or(fam.region);
  const auto radii = c.radii.empty() ? compactness_radii(g) : c.radii;
  const int grid = resolve_grid(c, g);
  const auto epsilons = c.epsilons.empty() ? std::vector<double>{1e-2} : c.epsilons;
  const double pair_radius = c.modulus_radius > 0.0 ? c.modulus_radius : (g.discrete() ? 1.5 : 0.1);
  resolved["K"] = region_json(region);
  resolved["radii"] = radii;
  resolved["grid"] = grid;
  resolved["epsilons"] = epsilons;
  resolved["modulus_radius"] = pair_radius;
  resolved["max_doublings"] = c.max_doublings;

  // Left modulus of the family over the radii, ascending in r.
  Table omega{"", {"r", "omega"}, {}};
  for (auto it = radii.rbegin(); it != radii.rend(); ++it) {
    const auto rep = equicontinuity_modulus(g, fam, region, *it, {grid, 0});
    omega.rows.push_back({*it, rep.omega});
  }
  bool monotone = true;
  for (std::size_t i = 1; i < omega.rows.size(); ++i) monotone = monotone && omega.rows[i][1] >= omega.rows[i - 1][1];
  rec.check("omega-monotone-in-r", monotone, std::to_string(omega.rows.size()) + " radii");

  // Step-2 bounds per member over the operator family.
  std::vector<ConvOperator> ops;
  for (double r : radii) ops.emplace_back(Mollifier::build(g, c.profile, r, c.rule), c.rule);
  Table step2{"step2", {"member", "uniform_value", "uniform_bound", "equicontinuity_value", "equicontinuity_bound"}, {}};
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    const TestFunction& fn = fam.members[i];
    const BoundCheck ub = uniform_bound(ops, fn, region, grid);
    const BoundCheck oe = output_equicontinuity(ops, fn, region, pair_radius, grid);
    step2.rows.push_back({static_cast<double>(i), ub.value, ub.bound, oe.value, oe.bound});
    rec.at_most("uniform-bound", ub.value, ub.bound + tol.step2, fn.name);
    rec.at_most("output-equicontinuity", oe.value, oe.bound + tol.step2, fn.name);
  }

  // Greedy ε-nets of the orbit while the radius set doubles in density. The
  // points are enumerated coarse-first, so the net size never decreases from
  // one level to the next and is bounded by the packing number of the orbit
  // closure; the check records the first level a doubling leaves it unchanged.
  std::vector<double> level_radii = radii;
  auto orbit = family_orbit(g, c, level_radii, fam, region, grid);
  std::vector<std::vector<std::size_t>> sizes(epsilons.size());
  auto measure = [&] {
    for (std::size_t e = 0; e < epsilons.size(); ++e) sizes[e].push_back(epsilon_net_check(orbit, epsilons[e]).size());
  };
  auto stable_level = [&](std::size_t e) -> int {
    for (std::size_t l = 1; l < sizes[e].size(); ++l) {
      if (sizes[e][l] == sizes[e][l - 1]) return static_cast<int>(l) - 1;
    }
    return -1;
  };
  measure();
  Table levels{"net_levels", {"epsilon", "level", "radii", "net_size"}, {}};
  std::vector<std::size_t> level_count{level_radii.size()};
  for (int level = 1; level <= c.max_doublings; ++level) {
    bool all_stable = true;
    for (std::size_t e = 0; e < epsilons.size(); ++e) all_stable = all_stable && stable_level(e) >= 0;
    if (all_stable) break;
    const auto added = midpoints(level_radii);
    if (added.empty()) {
      for (auto& s : sizes) s.push_back(s.back());
    } else {
      auto extra = family_orbit(g, c, added, fam, region, grid);
      std::move(extra.begin(), extra.end(), std::back_inserter(orbit));
      level_radii.insert(level_radii.end(), added.begin(), added.end());
      std::sort(level_radii.begin(), level_radii.end(), std::greater<>());
      measure();
    }
    level_count.push_back(level_radii.size());
  }
  Table net{"net", {"epsilon", "net_size", "stable_level"}, {}};
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    for (std::size_t l = 0; l < sizes[e].size(); ++l) {
      levels.rows.push_back({epsilons[e], static_cast<double>(l), static_cast<double>(level_count[l]),
                             static_cast<double>(sizes[e][l])});
    }
    const int stable = stable_level(e);
    const double n = static_cast<double>(stable >= 0 ? sizes[e][static_cast<std::size_t>(stable)] : sizes[e].back());
    net.rows.push_back({epsilons[e], n, static_cast<double>(stable)});
    rec.check("net-stabilizes", stable >= 0,
              "epsilon " + num(epsilons[e]) + ": size " + num(n) +
                  (stable >= 0 ? " unchanged by doubling at level " + std::to_string(stable)
                               : " still growing after " + std::to_string(c.max_doublings) + " doublings"));
  }
  check_non_increasing(rec, "net-size-non-increasing-in-epsilon", net, 1, 0.0);

  out.tables.push_back(std::move(omega));
  out.tables.push_back(std::move(net));
  out.tables.push_back(std::move(levels));
  out.tables.push_back(std::move(step2));
}

GroupPoint random_affine(Uniform& u) { return GroupPoint(std::exp(u(-1.5, 1.5)), u(-3.0, 3.0)); }

double point_distance(const GroupPoint& x, const GroupPoint& y) {
  double d = 0.0;
  for (int i = 0; i < x.dim(); ++i) d = std::max(d, std::abs(x[i] - y[i]) / std::max(1.0, std::abs(y[i])));
  return d;
}

void run_calibrate(const ExperimentConfig& c, const Tolerances& tol, ExperimentResult& out, Recorder& rec,
                   ordered_json& resolved) {
  const CalibrationReport rep = calibrate_affine(c.rule);
  resolved["density_exponent"] = rep.best.density_exponent;
  resolved["modular_exponent"] = rep.best.modular_exponent;

  Table density{"", {"density_exponent", "left_invariance_residual"}, {}};
  for (const auto& e : rep.density) {
    density.rows.push_back({static_cast<double>(e.exponent), e.residual});
    const std::string where = "a^" + std::to_string(e.exponent);
    if (e.exponent == rep.best.density_exponent) {
      rec.at_most("density-accepted", e.residual, tol.calibration_accept, where);
    } else if (std::abs(e.exponent - rep.best.density_exponent) == 1) {
      rec.at_least("density-off-by-one-rejected", e.residual, tol.calibration_reject, where);
    }
  }
  Table modular{"modular", {"modular_exponent", "forms_discrepancy"}, {}};
  for (const auto& e : rep.modular) {
    modular.rows.push_back({static_cast<double>(e.exponent), e.residual});
    const std::string where = "a^" + std::to_string(e.exponent);
    if (e.exponent == rep.best.modular_exponent) {
      rec.at_most("modular-accepted", e.residual, tol.calibration_accept, where);
    } else {
      rec.at_least("modular-wrong-exponent-rejected", e.residual, tol.calibration_reject, where);
    }
  }
  rec.check("calibration-matches-conventions", rep.best == kAffineConventions,
            "density a^" + std::to_string(rep.best.density_exponent) + ", modular a^" +
                std::to_string(rep.best.modular_exponent));
  rec.at_most("modular-relation", rep.modular_relation_residual, tol.calibration_accept, "shift (2, 0)");

  // Seeded random-sample group invariants.
  const Group g = Group::affine(rep.best);
  Uniform u(c.seed);
  double assoc = 0.0, involution = 0.0, inverse = 0.0, homomorphism = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GroupPoint x = random_affine(u), y = random_affine(u), z = random_affine(u);
    assoc = std::max(assoc, point_distance(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z))));
    involution = std::max(involution, point_distance(g.inv(g.inv(x)), x));
    inverse = std::max(inverse, point_distance(g.mul(x, g.inv(x)), g.identity()));
    const double dxy = g.modular(g.mul(x, y));
    homomorphism = std::max(homomorphism, std::abs(dxy - g.modular(x) * g.modular(y)) / dxy);
  }
  rec.at_most("associativity", assoc, 1e-12, "1000 random triples");
  rec.at_most("inverse-involution", involution, 1e-12, "1000 random points");
  rec.at_most("inverse", inverse, 1e-12, "1000 random points");
  rec.at_most("modular-homomorphism", homomorphism, 1e-12, "relative, 1000 random pairs");
  Table inv{"invariants", {"associativity", "inverse_involution", "inverse", "modular_homomorphism"},
            {{assoc, involution, inverse, homomorphism}}};

  out.tables.push_back(std::move(density));
  out.tables.push_back(std::move(modular));
  out.tables.push_back(std::move(inv));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, const Tolerances& tol) {
  ExperimentResult out;
  out.name = c.name;
  Recorder rec(out);
  ordered_json resolved;
  try {
    const Group g = c.make_group();
    resolved["group"] = g.id();
    resolved["profile"] = to_string(c.profile);
    resolved["family"] = c.family;
    resolved["rule"] = {{"scheme", to_string(c.rule.scheme)}, {"panels", c.rule.panels}, {"points", c.rule.points}};
    resolved["seed"] = c.seed;
    switch (c.experiment) {
      case ExperimentKind::Calibrate: run_calibrate(c, tol, out, rec, resolved); break;
      case ExperimentKind::Converge: run_converge(c, g, tol, out, rec, resolved); break;
      case ExperimentKind::Rank: run_rank(c, g, tol, out, rec, resolved); break;
      case ExperimentKind::Compactness: run_compactness(c, g, tol, out, rec, resolved); break;
      case ExperimentKind::Forms: run_forms(c, g, tol, out, rec, resolved); break;
    }
    check_finite(rec, out);
  } catch (const ConfigError& e) {
    out.config_error = e.what();
  } catch (const DomainError& e) {
    out.config_error = e.what();
  } catch (const Error& e) {
    rec.check("execution", false, e.what());
  }

  ordered_json meta;
  meta["name"] = c.name;
  meta["version"] = std::string(kVersion);
  meta["experiment"] = to_string(c.experiment);
  meta["config"] = c.source;
  meta["resolved"] = resolved;
  meta["tolerances"] = tol.to_json();
  ordered_json contracts = ordered_json::array();
  for (const Contract& k : out.contracts) {
    contracts.push_back({{"name", k.name}, {"passed", k.passed}, {"detail", k.detail}});
  }
  meta["contracts"] = contracts;
  meta["config_error"] = out.config_error ? ordered_json(*out.config_error) : ordered_json(nullptr);
  meta["passed"] = out.passed();
  out.metadata = std::move(meta);
  return out;
}

// ---------------------------------------------------------------------------
// Output

std::string format_csv(const Table& table) {
  std::string s;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) s += ',';
    s += table.columns[i];
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += num(row[i]);
    }
    s += '\n';
  }
  return s;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::string table_file(const std::string& stem, const Table& t) {
  return stem + (t.suffix.empty() ? "" : "." + t.suffix) + ".csv";
}

std::string plot_script(const ExperimentResult& r, const std::string& stem) {
  const std::string leaf = fs::path(stem).filename().string();
  std::string s = "# gnuplot script; run from the directory holding the CSV files\n";
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set grid\n";
  if (r.tables.empty()) return s;
  const Table& t = r.tables.front();
  s += "set xlabel '" + t.columns.front() + "'\n";
  s += "set logscale y\n";
  s += "plot ";
  for (std::size_t i = 1; i < t.columns.size(); ++i) {
    if (i > 1) s += ", \\\n     ";
    s += "'" + table_file(leaf, t) + "' using 1:" + std::to_string(i + 1) + " with linespoints";
  }
  s += "\n";
  return s;
}

}  // namespace

void write_outputs(const ExperimentResult& result, const fs::path& dir) {
  const fs::path stem_path = dir / result.name;
  fs::create_directories(stem_path.parent_path());
  const std::string stem = stem_path.string();
  for (const Table& t : result.tables) write_file(table_file(stem, t), format_csv(t));
  write_file(stem + ".plot", plot_script(result, stem));
  write_file(stem + ".meta.json", result.metadata.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Verification matrix

bool VerifySummary::passed() const {
  return std::all_of(results.begin(), results.end(), [](const ExperimentResult& r) { return r.passed(); });
}

ordered_json VerifySummary::to_json() const {
  ordered_json list = ordered_json::array();
  std::size_t n_pass = 0;
  for (const ExperimentResult& r : results) {
    ordered_json failed = ordered_json::array();
    for (const Contract& c : r.contracts) {
      if (!c.passed) failed.push_back({{"name", c.name}, {"detail", c.detail}});
    }
    if (r.passed()) ++n_pass;
    list.push_back({{"name", r.name},
                    {"experiment", r.metadata.value("experiment", "")},
                    {"passed", r.passed()},
                    {"contracts", r.contracts.size()},
                    {"failed", failed},
                    {"config_error", r.config_error ? ordered_json(*r.config_error) : ordered_json(nullptr)}});
  }
  return ordered_json{{"version", std::string(kVersion)},
                      {"total", results.size()},
                      {"passed", n_pass},
                      {"failed", results.size() - n_pass},
                      {"experiments", list}};
}

std::vector<ExperimentConfig> builtin_matrix() {
  struct GroupSpec {
    const char* id;
    const char* tag;
    std::vector<const char*> profiles;
  };
  const std::vector<const char*> continuous = {"triangular", "cosine", "polynomial"};
  const std::vector<const char*> discrete = {"triangular", "cosine", "polynomial", "flat", "delta"};
  const std::vector<GroupSpec> groups = {{"real", "real", continuous},
                                         {"circle", "circle", continuous},
                                         {"zlattice", "zlattice", discrete},
                                         {"cyclic:8", "cyclic8", discrete},
                                         {"affine", "affine", continuous}};

  std::vector<ExperimentConfig> out;
  auto add = [&](ordered_json j) { out.push_back(parse_config(j, j["name"].get<std::string>())); };
  add({{"name", "calibrate-affine"}, {"experiment", "calibrate"}, {"group", "affine"}, {"seed", 1}});
  for (const GroupSpec& gs : groups) {
    const std::string g = gs.tag;
    for (const char* p : gs.profiles) {
      const std::string suffix = g + "-" + p;
      add({{"name", "converge-" + suffix}, {"experiment", "converge"}, {"group", gs.id}, {"profile", p},
           {"family", "all"}, {"seed", 1}});
      add({{"name", "forms-" + suffix}, {"experiment", "forms"}, {"group", gs.id}, {"profile", p},
           {"family", "all"}, {"seed", 1}});
      add({{"name", "compactness-" + suffix}, {"experiment", "compactness"}, {"group", gs.id}, {"profile", p},
           {"family", "trig"}, {"seed", 1}});
      const double radius = std::string(gs.id) == "zlattice" || std::string(gs.id) == "cyclic:8" ? 1.5 : 0.2;
      add({{"name", "rank-" + suffix}, {"experiment", "rank"}, {"group", gs.id},
           {"mollifier", {{"profile", p}, {"radius", radius}}}, {"family", "all"}, {"seed", 1}});
    }
  }
  return out;
}

std::vector<ExperimentConfig> load_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open matrix file");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": JSON parse error: " + e.what());
  }
  if (!j.is_object() || !j.contains("experiments") || !j["experiments"].is_array()) {
    throw ConfigError(path.string() + ": key 'experiments': expected an array");
  }
  std::vector<ExperimentConfig> out;
  std::set<std::string> names;
  const fs::path base = path.parent_path();
  for (std::size_t i = 0; i < j["experiments"].size(); ++i) {
    const auto& e = j["experiments"][i];
    const std::string key = "experiments[" + std::to_string(i) + "]";
    ExperimentConfig c;
    if (e.is_string()) {
      c = load_config(base / e.get<std::string>());
    } else {
      try {
        c = parse_config(e, "experiment-" + std::to_string(i));
      } catch (const ConfigError& err) {
        throw ConfigError(path.string() + ": " + key + ": " + err.what());
      }
    }
    if (!names.insert(c.name).second) {
      throw ConfigError(path.string() + ": " + key + ": duplicate experiment name '" + c.name + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

VerifySummary verify(std::vector<ExperimentConfig> configs, const VerifyOptions& options) {
  std::sort(configs.begin(), configs.end(),
            [](const ExperimentConfig& a, const ExperimentConfig& b) { return a.name < b.name; });
  if (options.modular_exponent) {
    for (auto& c : configs) {
      if (c.experiment != ExperimentKind::Calibrate) c.modular_exponent = options.modular_exponent;
    }
  }
  const Tolerances tol = Tolerances{}.scaled(options.tolerance_scale);

  VerifySummary summary;
  summary.results.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      ExperimentResult r = run_experiment(configs[i], tol);
      try {
        write_outputs(r, options.output_dir);
      } catch (const std::exception& e) {
        r.contracts.push_back({"write-outputs", false, e.what()});
      }
      summary.results[i] = std::move(r);
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> threads;
  for (int k = 1; k < jobs; ++k) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return summary;
}

}  // namespace lcapprox
