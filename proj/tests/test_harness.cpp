#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lcapprox/error.hpp"
#include "lcapprox/harness.hpp"

using namespace lcapprox;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) { return parse_config(ordered_json::parse(text), "t"); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lcapprox-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const Contract* find_contract(const ExperimentResult& r, const std::string& name) {
  for (const Contract& c : r.contracts) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config parsing") {
    const auto c = parse(R"({"experiment": "rank", "group": "cyclic:8", "mollifier": {"profile": "flat", "radius": 1.5},
                             "ranks": [1, 4, 8], "family": "trig", "K": {"x": [0, 7]}, "rule": {"scheme": "trapezoid", "panels": 8, "points": 2},
                             "output": "runs/c8", "seed": 42})");
    CHECK(c.experiment == ExperimentKind::Rank);
    CHECK(c.profile == Profile::Flat);
    CHECK(c.radius == 1.5);
    CHECK(c.ranks == std::vector<int>{1, 4, 8});
    CHECK(c.region == CompactRegion({0.0, 7.0}));
    CHECK(c.rule == QuadRule{Scheme::Trapezoid, 8, 2});
    CHECK(c.name == "runs/c8");
    CHECK(c.seed == 42);
    CHECK(parse(R"({"experiment": "forms", "family": "trig/cos"})").family == "trig/cos");
  }

  TEST_CASE("config errors name the key") {
    const std::vector<std::pair<std::string, std::string>> bad = {
        {R"({"group": "real"})", "experiment"},
        {R"({"experiment": "sweep"})", "experiment"},
        {R"({"experiment": "converge", "radii": [0.1, 0.2]})", "radii"},
        {R"({"experiment": "rank", "ranks": [4, 2]})", "ranks"},
        {R"({"experiment": "rank", "ranks": [2], "tolerance": 0.1})", "tolerance"},
        {R"({"experiment": "converge", "family": "waves"})", "family"},
        {R"({"experiment": "converge", "group": "torus"})", "group"},
        {R"({"experiment": "converge", "grid": "many"})", "grid"},
        {R"({"experiment": "converge", "colour": 1})", "colour"},
        {R"({"experiment": "converge", "rule": {"scheme": "simpson"}})", "rule.scheme"},
        {R"({"experiment": "converge", "mollifier": {"profile": "gaussian"}})", "mollifier.profile"},
        {R"({"experiment": "converge", "K": {"x": [1, 0]}})", "K.x"},
        {R"({"experiment": "converge", "group": "affine", "K": {"x": [1, 2]}})", "K.y"},
        {R"({"experiment": "calibrate", "group": "real"})", "group"},
        {R"({"experiment": "converge", "seed": -1})", "seed"},
    };
    for (const auto& [text, key] : bad) {
      CAPTURE(text);
      try {
        parse(text);
        FAIL("expected a ConfigError");
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'" + key + "'") != std::string::npos);
      }
    }
  }

  TEST_CASE("parse errors carry line and column") {
    const fs::path dir = scratch_dir("parse");
    std::ofstream(dir / "broken.json") << "{\"experiment\": \"converge\",\n  \"radii\": [0.1,, 0.2]}\n";
    try {
      load_config(dir / "broken.json");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("broken.json:2:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
  }

  TEST_CASE("CSV format") {
    const Table t{"", {"radius", "sup_error"}, {{0.1, 1.0 / 3.0}, {0.05, 0.0}}};
    CHECK(format_csv(t) == "radius,sup_error\n0.10000000000000001,0.33333333333333331\n0.050000000000000003,0\n");
  }

  TEST_CASE("converge on the lattice with a delta mollifier") {
    const auto r = run_experiment(parse(R"({"experiment": "converge", "group": "zlattice", "profile": "delta",
                                             "radii": [0.9, 0.5], "family": "all"})"),
                                  Tolerances{});
    CHECK(r.passed());
    REQUIRE(r.tables.size() == 1);
    for (const auto& row : r.tables[0].rows) CHECK(row[1] == 0.0);
  }

  TEST_CASE("converge on the line reproduces the cosine defect") {
    const auto r = run_experiment(parse(R"({"experiment": "converge", "group": "real", "profile": "triangular",
                                             "radii": [0.4, 0.2, 0.1, 0.05], "family": "trig/cos", "K": {"x": [0, 1]}})"),
                                  Tolerances{});
    CHECK(r.passed());
    CHECK(r.tables[0].rows[2][1] == doctest::Approx(1.0 - 2.0 * (1.0 - std::cos(0.1)) / 0.01).epsilon(1e-9));
  }

  TEST_CASE("rank on the cyclic group") {
    const auto r = run_experiment(parse(R"({"experiment": "rank", "group": "cyclic:8", "mollifier": {"profile": "flat", "radius": 1.5},
                                             "ranks": [2, 4, 8], "family": "all"})"),
                                  Tolerances{});
    CHECK(r.passed());
    CHECK(r.tables[0].columns == std::vector<std::string>{"rank", "sup_error", "discarded_mass"});
    CHECK(r.tables[0].rows.back()[1] <= 1e-13);
  }

  TEST_CASE("violations are reported, not thrown") {
    Tolerances strict;
    strict.forms_unimodular = 1e-300;
    const auto r = run_experiment(parse(R"({"experiment": "forms", "group": "real", "family": "gauss", "radii": [0.2]})"), strict);
    CHECK_FALSE(r.passed());
    const Contract* c = find_contract(r, "forms-agree");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->passed);
    CHECK(r.metadata["contracts"].size() == r.contracts.size());

    const auto bad = run_experiment(parse(R"({"experiment": "forms", "group": "circle", "radii": [3.5]})"), Tolerances{});
    CHECK(bad.config_error.has_value());
    CHECK_FALSE(bad.passed());
  }

  TEST_CASE("outputs and metadata") {
    const fs::path dir = scratch_dir("outputs");
    auto cfg = parse(R"({"experiment": "compactness", "group": "real", "family": "trig", "output": "sub/cmp", "seed": 3})");
    const auto r = run_experiment(cfg, Tolerances{}.scaled(2.0));
    CHECK(r.passed());
    write_outputs(r, dir);
    for (const char* f : {"sub/cmp.csv", "sub/cmp.net.csv", "sub/cmp.net_levels.csv", "sub/cmp.step2.csv", "sub/cmp.plot",
                          "sub/cmp.meta.json"}) {
      CHECK(fs::exists(dir / f));
    }
    CHECK(slurp(dir / "sub/cmp.csv").rfind("r,omega\n", 0) == 0);
    CHECK(slurp(dir / "sub/cmp.net.csv").rfind("epsilon,net_size", 0) == 0);
    CHECK(slurp(dir / "sub/cmp.plot").find("'cmp.csv'") != std::string::npos);
    const auto meta = ordered_json::parse(slurp(dir / "sub/cmp.meta.json"));
    CHECK(meta["config"] == cfg.source);
    CHECK(meta["tolerances"]["step2"] == 2e-8);
    CHECK(meta["version"] == std::string(kVersion));
  }

  TEST_CASE("identical config and seed give identical bytes") {
    const auto cfg = parse(R"({"experiment": "converge", "group": "affine", "family": "kink", "seed": 9})");
    const fs::path a = scratch_dir("det-a"), b = scratch_dir("det-b");
    write_outputs(run_experiment(cfg, Tolerances{}), a);
    write_outputs(run_experiment(cfg, Tolerances{}), b);
    CHECK(slurp(a / "t.csv") == slurp(b / "t.csv"));
    CHECK(slurp(a / "t.meta.json") == slurp(b / "t.meta.json"));
  }

  TEST_CASE("verify") {
    const fs::path dir = scratch_dir("verify");
    VerifyOptions opt;
    opt.output_dir = dir;
    const auto empty = verify({}, opt);
    CHECK(empty.passed());
    CHECK(empty.results.empty());
    CHECK(empty.to_json()["total"] == 0);

    std::vector<ExperimentConfig> configs = {
        parse_config(ordered_json::parse(R"({"experiment": "forms", "group": "affine", "family": "trig", "radii": [0.2]})"), "b-affine"),
        parse_config(ordered_json::parse(R"({"experiment": "forms", "group": "real", "radii": [0.2]})"), "a-real"),
        parse_config(ordered_json::parse(R"({"experiment": "converge", "group": "affine", "family": "trig", "radii": [0.2]})"), "c-affine"),
    };
    const auto good = verify(configs, opt);
    CHECK(good.passed());
    REQUIRE(good.results.size() == 3);
    CHECK(good.results[0].name == "a-real");  // ordered by name

    opt.modular_exponent = 1;
    opt.jobs = 2;
    const auto hooked = verify(configs, opt);
    CHECK_FALSE(hooked.passed());
    CHECK(hooked.results[0].passed());
    CHECK_FALSE(hooked.results[1].passed());  // forms on the affine group
    CHECK(hooked.results[2].passed());        // converge does not use Δ
    CHECK(hooked.to_json()["failed"] == 1);
  }

  TEST_CASE("matrix files") {
    const fs::path dir = scratch_dir("matrix");
    std::ofstream(dir / "one.json") << R"({"experiment": "forms", "group": "cyclic:5", "radii": [1.5]})";
    std::ofstream(dir / "m.json") << R"({"experiments": ["one.json", {"name": "two", "experiment": "converge"}]})";
    const auto configs = load_matrix(dir / "m.json");
    REQUIRE(configs.size() == 2);
    CHECK(configs[0].name == "one");
    CHECK(configs[1].name == "two");
    std::ofstream(dir / "dup.json") << R"({"experiments": [{"name": "x", "experiment": "forms"}, {"name": "x", "experiment": "rank"}]})";
    CHECK_THROWS_AS(load_matrix(dir / "dup.json"), ConfigError);
    std::ofstream(dir / "bad.json") << R"({"experiments": {}})";
    CHECK_THROWS_AS(load_matrix(dir / "bad.json"), ConfigError);
  }

  TEST_CASE("built-in matrix covers every group, profile and experiment") {
    const auto m = builtin_matrix();
    CHECK(m.size() == 77);
    int calibrate = 0;
    for (const auto& c : m) calibrate += c.experiment == ExperimentKind::Calibrate;
    CHECK(calibrate == 1);
  }
}
