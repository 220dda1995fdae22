// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lcapprox/calibration.hpp"
#include "lcapprox/compactness.hpp"
#include "lcapprox/conv_op.hpp"
#include "lcapprox/finite_rank.hpp"
#include "lcapprox/haar.hpp"
#include "lcapprox/harness.hpp"
#include "oracles.hpp"

using namespace lcapprox;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Accumulates checks; the first failure is kept as the detail line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && pass_) failure_ = what;
    pass_ = pass_ && ok;
  }
  Outcome done(const std::string& summary) const {
    if (pass_) return {true, summary + " (" + std::to_string(count_) + " checks)"};
    return {false, "first failure: " + failure_};
  }

 private:
  bool pass_ = true;
  int count_ = 0;
  std::string failure_;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct GroupCase {
  Group group;
  std::vector<Profile> profiles;
};

std::vector<GroupCase> matrix_groups() {
  const std::vector<Profile> continuous = {Profile::Triangular, Profile::CosineBump, Profile::PolynomialBump};
  std::vector<Profile> discrete = continuous;
  discrete.push_back(Profile::Flat);
  discrete.push_back(Profile::DiscreteDelta);
  return {{Group::real_line(), continuous},
          {Group::circle(), continuous},
          {Group::integer_lattice(), discrete},
          {Group::cyclic(8), discrete},
          {Group::affine(), continuous}};
}

const std::vector<double> kRadii = {0.4, 0.2, 0.1, 0.05};
const std::vector<double> kDiscreteRadii = {3.5, 2.5, 1.5, 0.5};

std::vector<double> radii_for(const Group& g) { return g.discrete() ? kDiscreteRadii : kRadii; }

// 1. Mollifier axioms ---------------------------------------------------------
Outcome mollifier_axioms() {
  Checks c;
  oracle::Uniform u(2024);
  double worst_mass = 0.0;
  for (const auto& gc : matrix_groups()) {
    const Group& g = gc.group;
    std::vector<double> radii = kRadii;
    if (g.discrete()) radii.insert(radii.end(), kDiscreteRadii.begin(), kDiscreteRadii.end());
    for (Profile p : gc.profiles) {
      for (double r : radii) {
        const std::string where = g.id() + " " + to_string(p) + " r=" + std::to_string(r);
        const Mollifier m = Mollifier::build(g, p, r);
        bool nonneg = true, outside_zero = true;
        for (int i = 0; i < 1000; ++i) {
          GroupPoint x;
          if (g.discrete()) {
            x = g.reduce(GroupPoint(std::floor(u(-r - 2.0, r + 3.0))));
          } else if (g.dimension() == 2) {
            const double h = std::min(1.5 * r, 0.5 * (1.0 + r));
            x = GroupPoint(u(1.0 - h, 1.0 + h), u(-1.5 * r, 1.5 * r));
          } else {
            x = g.reduce(GroupPoint(u(-1.5 * r, 1.5 * r)));
          }
          const double v = m(x);
          nonneg = nonneg && v >= 0.0;
          if (g.distance_to_identity(x) >= r) outside_zero = outside_zero && v == 0.0;
        }
        c.expect(nonneg, where + ": negative value");
        c.expect(outside_zero, where + ": nonzero outside support");
        const auto nodes = m.support_nodes(QuadRule{}.refined());
        const double mass = integrate_nodes([&](const GroupPoint& x) { return m(x); }, nodes);
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        c.expect(std::abs(mass - 1.0) <= 1e-10, where + ": |mass - 1| = " + sci(std::abs(mass - 1.0)));
      }
    }
  }
  return c.done("max |mass - 1| = " + sci(worst_mass));
}

// 2. Form equivalence ---------------------------------------------------------
Outcome form_equivalence() {
  Checks c;
  double worst_uni = 0.0, worst_aff = 0.0, weakest_negative = 1e300;
  for (const auto& gc : matrix_groups()) {
    const Group& g = gc.group;
    const int n = g.dimension() == 1 ? 65 : 9;
    for (Profile p : gc.profiles) {
      for (double r : radii_for(g)) {
        const ConvOperator op(Mollifier::build(g, p, r));
        for (const auto& name : catalog_names()) {
          const auto fam = catalog_family(name, g);
          const double d = forms_agree(op, fam, grid_points(g, fam.region, n));
          const std::string where = g.id() + " " + to_string(p) + " r=" + std::to_string(r) + " " + name;
          if (g.unimodular()) {
            worst_uni = std::max(worst_uni, d);
            c.expect(d <= 1e-8, where + ": " + sci(d));
          } else {
            worst_aff = std::max(worst_aff, d);
            c.expect(d <= 1e-6, where + ": " + sci(d));
          }
        }
      }
    }
  }
  // Negative control: every other modular exponent.
  for (int e = -2; e <= 2; ++e) {
    if (e == kAffineConventions.modular_exponent) continue;
    const Group wrong = Group::affine({kAffineConventions.density_exponent, e});
    for (Profile p : {Profile::Triangular, Profile::PolynomialBump}) {
      const ConvOperator op(Mollifier::build(wrong, p, 0.2));
      double d = 0.0;
      for (const char* name : {"trig", "bumps", "gauss"}) {
        const auto fam = catalog_family(name, wrong);
        d = std::max(d, forms_agree(op, fam, grid_points(wrong, fam.region, 9)));
      }
      weakest_negative = std::min(weakest_negative, d);
      c.expect(d > 1e-2, "wrong exponent a^" + std::to_string(e) + " only " + sci(d));
    }
  }
  return c.done("unimodular max " + sci(worst_uni) + ", affine max " + sci(worst_aff) +
                ", wrong-exponent min " + sci(weakest_negative));
}

// 3. Step-1 convergence -------------------------------------------------------
Outcome step1_convergence() {
  Checks c;
  // f = cos on the line: sup-error against the independently verified defect.
  const Group line = Group::real_line();
  double worst_defect = 0.0;
  const auto cos_only = [&] {
    TestFamily fam = catalog_family("trig", line);
    fam.members.resize(1);
    return fam;
  }();
  const auto cos_rows = convergence_sweep(line, Profile::Triangular, kRadii, cos_only, cos_only.region, 257);
  for (const auto& row : cos_rows) {
    const double d = row.radius;
    const auto kernel = [d](double s) { return (d - std::abs(s)) / (d * d) * std::cos(s); };
    const double multiplier = oracle::simpson(kernel, -d, 0.0, 20000) + oracle::simpson(kernel, 0.0, d, 20000);
    c.expect(std::abs(multiplier - oracle::triangular_cos_multiplier(d)) <= 1e-12,
             "oracle disagreement at d=" + std::to_string(d));
    const double expected = 1.0 - multiplier;  // max |cos| on [0, 1] is 1
    worst_defect = std::max(worst_defect, std::abs(row.sup_error - expected));
    c.expect(std::abs(row.sup_error - expected) <= 1e-7, "cos defect at d=" + std::to_string(d) + ": " +
                                                              sci(row.sup_error) + " vs " + sci(expected));
  }
  c.expect(std::abs(cos_rows[2].sup_error - 8.331e-4) <= 1e-7, "d=0.1 row " + sci(cos_rows[2].sup_error));

  // Monotone sup-error and the step-1 chain for every family everywhere.
  for (const auto& gc : matrix_groups()) {
    const Group& g = gc.group;
    const int n = g.dimension() == 1 ? 257 : 17;
    for (Profile p : gc.profiles) {
      for (const auto& name : catalog_names()) {
        const auto fam = catalog_family(name, g);
        const auto rows = convergence_sweep(g, p, radii_for(g), fam, fam.region, n);
        const std::string where = g.id() + " " + to_string(p) + " " + name;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          c.expect(rows[i].sup_error <= rows[i].modulus_bound + 1e-9,
                   where + ": chain broken at r=" + std::to_string(rows[i].radius));
          if (i > 0) {
            c.expect(rows[i].sup_error <= rows[i - 1].sup_error + 1e-12,
                     where + ": sup-error rises at r=" + std::to_string(rows[i].radius));
          }
        }
      }
    }
  }
  return c.done("d=0.1 sup-error " + sci(cos_rows[2].sup_error) + ", max |measured - oracle| " + sci(worst_defect));
}

// 4. Step-2 bounds ------------------------------------------------------------
Outcome step2_bounds() {
  Checks c;
  double min_slack = 1e300;
  for (const auto& gc : matrix_groups()) {
    const Group& g = gc.group;
    const int n = g.dimension() == 1 ? 65 : 9;
    const double pair_r = g.discrete() ? 1.5 : 0.1;
    std::vector<ConvOperator> ops;
    for (double r : radii_for(g)) ops.emplace_back(Mollifier::build(g, Profile::Triangular, r));
    for (const auto& name : catalog_names()) {
      const auto fam = catalog_family(name, g);
      for (const TestFunction& f : fam.members) {
        const std::string where = g.id() + " " + name + "/" + f.name;
        const auto ub = uniform_bound(ops, f, fam.region, n);
        const auto oe = output_equicontinuity(ops, f, fam.region, pair_r, n);
        c.expect(ub.value <= ub.bound + 1e-8, where + ": uniform " + sci(ub.value) + " > " + sci(ub.bound));
        c.expect(oe.value <= oe.bound + 1e-8, where + ": equicontinuity " + sci(oe.value) + " > " + sci(oe.bound));
        min_slack = std::min({min_slack, ub.bound - ub.value, oe.bound - oe.value});
      }
    }
  }
  return c.done("min slack " + sci(min_slack));
}

// 5. Total-boundedness proxy --------------------------------------------------
Outcome net_stabilization() {
  Checks c;
  // Reference case: P^U cos over dyadic radii, one doubling.
  const Group line = Group::real_line();
  const auto cosine = catalog_family("trig", line).members.front();
  const std::vector<double> dyadic = {0.4, 0.2, 0.1, 0.05, 0.025};
  auto orbit = operator_orbit(line, Profile::Triangular, dyadic, cosine, CompactRegion({0.0, 1.0}), 65);
  const std::size_t coarse = epsilon_net_check(orbit, 1e-2).size();
  std::vector<double> mids;
  for (std::size_t i = 1; i < dyadic.size(); ++i) mids.push_back(0.5 * (dyadic[i - 1] + dyadic[i]));
  const auto extra = operator_orbit(line, Profile::Triangular, mids, cosine, CompactRegion({0.0, 1.0}), 65);
  orbit.insert(orbit.end(), extra.begin(), extra.end());
  const std::size_t fine = epsilon_net_check(orbit, 1e-2).size();
  c.expect(coarse <= 3 && fine == coarse,
           "cos orbit net " + std::to_string(coarse) + " -> " + std::to_string(fine));

  // Every catalog family on every group through the compactness experiment.
  std::size_t largest = 0;
  std::string largest_where;
  for (const auto& gc : matrix_groups()) {
    for (const auto& name : catalog_names()) {
      nlohmann::ordered_json j = {{"experiment", "compactness"}, {"group", gc.group.id()}, {"family", name},
                                  {"epsilons", {1e-2}}};
      const auto r = run_experiment(parse_config(j, "net"), Tolerances{});
      const std::string where = gc.group.id() + " " + name;
      bool stable = false;
      for (const auto& k : r.contracts) {
        if (k.name == "net-stabilizes") {
          stable = k.passed;
          c.expect(k.passed, where + ": " + k.detail);
        }
      }
      c.expect(stable, where + ": no stabilization contract");
      for (const auto& t : r.tables) {
        if (t.suffix == "net" && !t.rows.empty() && t.rows[0][1] > static_cast<double>(largest)) {
          largest = static_cast<std::size_t>(t.rows[0][1]);
          largest_where = where;
        }
      }
    }
  }
  return c.done("cos orbit net " + std::to_string(coarse) + " = " + std::to_string(fine) +
                " after doubling; largest stabilized net " + std::to_string(largest) + " (" + largest_where + ")");
}

// 6. Finite-rank correctness --------------------------------------------------
Outcome finite_rank() {
  Checks c;
  double worst_recon = 0.0, worst_apply = 0.0;
  struct SampleCase {
    Group g;
    Profile p;
    double r;
    int n;
  };
  const std::vector<SampleCase> cases = {{Group::real_line(), Profile::Triangular, 0.1, 64},
                                         {Group::circle(), Profile::CosineBump, 0.4, 64},
                                         {Group::integer_lattice(), Profile::Triangular, 2.5, 1},
                                         {Group::cyclic(8), Profile::Flat, 1.5, 1},
                                         {Group::affine(), Profile::PolynomialBump, 0.2, 9}};
  for (const auto& sc : cases) {
    const ConvOperator op(Mollifier::build(sc.g, sc.p, sc.r));
    const CompactRegion k = default_region(sc.g);
    const auto ks = sample_kernel(op, k, sc.n);
    const int full = static_cast<int>(std::min(ks.matrix.rows(), ks.matrix.cols()));
    const auto sk = low_rank_factor(ks, RankTarget{full});
    const Eigen::MatrixXd rebuilt = sk.u_values() * sk.v_values().transpose();
    double recon = 0.0;
    for (Eigen::Index i = 0; i < ks.matrix.rows(); ++i) {
      for (Eigen::Index j = 0; j < ks.matrix.cols(); ++j) {
        recon = std::max(recon, std::abs(rebuilt(i, j) - ks.kernel_value(i, j)));
      }
    }
    worst_recon = std::max(worst_recon, recon);
    c.expect(recon <= 1e-12, sc.g.id() + ": full-rank reconstruction " + sci(recon));

    for (const auto& name : catalog_names()) {
      for (const TestFunction& f : catalog_family(name, sc.g).members) {
        const Eigen::VectorXd ref = discretized_apply(ks, f.f);
        const Eigen::VectorXd pair = sk.pairings(f.f);
        double d = 0.0;
        for (Eigen::Index i = 0; i < ref.size(); ++i) {
          d = std::max(d, std::abs(sk.apply(pair, ks.t_grid.point(ks.group, static_cast<std::size_t>(i))) - ref(i)));
        }
        worst_apply = std::max(worst_apply, d);
        c.expect(d <= 1e-12, sc.g.id() + " " + f.name + ": on-grid full rank " + sci(d));
      }
    }

    std::vector<int> ranks;
    for (int r = 1; r < full; r *= 2) ranks.push_back(r);
    ranks.push_back(full);
    for (const auto& name : catalog_names()) {
      const auto rows = rank_error_sweep(op, k, sc.n, ranks, catalog_family(name, sc.g));
      for (std::size_t i = 1; i < rows.size(); ++i) {
        c.expect(rows[i].sup_error <= rows[i - 1].sup_error + 1e-12,
                 sc.g.id() + " " + name + ": sweep rises at N=" + std::to_string(rows[i].rank));
      }
    }
  }

  // Circulant singular values against the brute-force DFT.
  double worst_dft = 0.0;
  for (int n : {5, 8, 13}) {
    for (Profile p : {Profile::Flat, Profile::Triangular, Profile::PolynomialBump}) {
      const Group g = Group::cyclic(n);
      const ConvOperator op(Mollifier::build(g, p, 2.5));
      const auto ks = sample_kernel(op, CompactRegion({0.0, n - 1.0}), 1);
      std::vector<double> row;
      for (Eigen::Index j = 0; j < ks.matrix.cols(); ++j) row.push_back(ks.kernel_value(0, j));
      auto dft = oracle::dft_magnitudes(row);
      std::sort(dft.rbegin(), dft.rend());
      const auto sv = low_rank_factor(ks, RankTarget{n}).singular_values();
      for (int i = 0; i < n; ++i) worst_dft = std::max(worst_dft, std::abs(sv(i) - dft[static_cast<std::size_t>(i)]));
    }
  }
  c.expect(worst_dft <= 1e-10, "circulant singular values off by " + sci(worst_dft));

  // Lattice delta mollifier reproduces f on K.
  const Group z = Group::integer_lattice();
  const ConvOperator delta(Mollifier::build(z, Profile::DiscreteDelta, 0.5));
  const auto ks = sample_kernel(delta, default_region(z), 1);
  const auto sk = low_rank_factor(ks, RankTarget{static_cast<int>(ks.matrix.rows())});
  for (const auto& name : catalog_names()) {
    for (const TestFunction& f : catalog_family(name, z).members) {
      for (const GroupPoint& t : grid_points(z, default_region(z), 1)) {
        c.expect(apply_finite_rank(sk, f.f, t) == f.f(t), "delta mollifier changes " + f.name + " at " + to_string(t));
      }
    }
  }
  return c.done("reconstruction " + sci(worst_recon) + ", on-grid " + sci(worst_apply) + ", DFT " + sci(worst_dft));
}

// 7. Haar / modular calibration -----------------------------------------------
Outcome calibration() {
  Checks c;
  const CalibrationReport rep = calibrate_affine();
  c.expect(rep.best == kAffineConventions, "calibration picked a^" + std::to_string(rep.best.density_exponent) +
                                               " / a^" + std::to_string(rep.best.modular_exponent));
  double accepted = 1e300, rejected = 1e300;
  for (const auto& e : rep.density) {
    if (e.exponent == kAffineConventions.density_exponent) accepted = e.residual;
    if (std::abs(e.exponent - kAffineConventions.density_exponent) == 1) rejected = std::min(rejected, e.residual);
  }
  c.expect(accepted < 1e-6, "calibrated density residual " + sci(accepted));
  c.expect(rejected > 1e-2, "off-by-one density residual " + sci(rejected));

  const Group g = Group::affine();
  oracle::Uniform u(99);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const GroupPoint x(std::exp(u(-3.0, 3.0)), u(-5.0, 5.0)), y(std::exp(u(-3.0, 3.0)), u(-5.0, 5.0));
    const double dxy = g.modular(g.mul(x, y));
    worst = std::max(worst, std::abs(dxy - g.modular(x) * g.modular(y)) / dxy);
  }
  c.expect(worst <= 1e-12, "modular homomorphism relative error " + sci(worst));
  return c.done("density residual " + sci(accepted) + " vs off-by-one " + sci(rejected) +
                ", homomorphism " + sci(worst));
}

// 8. Determinism ----------------------------------------------------------------
std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome determinism(const std::string& cli) {
  Checks c;
  const fs::path base = fs::temp_directory_path() / "lcapprox-acceptance";
  fs::remove_all(base);
  const fs::path a = base / "a", b = base / "b";
  const std::string run_a = "\"" + cli + "\" --output-dir \"" + a.string() + "\" verify > \"" + (base / "a.log").string() + "\" 2>&1";
  const std::string run_b = "\"" + cli + "\" --output-dir \"" + b.string() + "\" --jobs 3 verify > \"" + (base / "b.log").string() + "\" 2>&1";
  fs::create_directories(base);
  const int ea = std::system(run_a.c_str());
  const int eb = std::system(run_b.c_str());
  c.expect(ea == 0, "first verify exited with status " + std::to_string(ea));
  c.expect(eb == 0, "second verify exited with status " + std::to_string(eb));
  const auto ca = read_csvs(a), cb = read_csvs(b);
  c.expect(!ca.empty(), "verify wrote no CSV files");
  c.expect(ca.size() == cb.size(), "CSV file sets differ");
  std::size_t bytes = 0;
  for (const auto& [name, text] : ca) {
    const auto it = cb.find(name);
    c.expect(it != cb.end() && it->second == text, name + " differs between runs");
    bytes += text.size();
  }
  return c.done(std::to_string(ca.size()) + " CSV files, " + std::to_string(bytes) + " bytes identical (jobs 1 vs 3)");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to lcapprox CLI>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 mollifier axioms", mollifier_axioms},
      {"2 form equivalence", form_equivalence},
      {"3 step-1 convergence", step1_convergence},
      {"4 step-2 bounds", step2_bounds},
      {"5 total-boundedness proxy", net_stabilization},
      {"6 finite-rank correctness", finite_rank},
      {"7 Haar/modular calibration", calibration},
      {"8 determinism", [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << " [" << timing << "]"
              << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
