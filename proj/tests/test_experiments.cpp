#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "powergames/experiments.hpp"

using namespace powergames;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

StepRecord make_record(int step, std::vector<double> power, std::vector<double> rate) {
  StepRecord record;
  record.step = step;
  record.iterations = 10;
  record.converged = true;
  record.user_power = std::move(power);
  record.user_rate = std::move(rate);
  return record;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag)
      : path(fs::temp_directory_path() / (std::string("powergames_test_") + tag)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("preset names round-trip") {
  for (const std::string& name : preset_names())
    CHECK(preset_name(preset_from_name(name)) == name);
  CHECK_THROWS_AS(preset_from_name("fig9_unknown"), std::invalid_argument);
}

TEST_CASE("comparisons of identical series are all zero") {
  const Series series{make_record(0, {1.0, 2.0}, {3.0, 4.0}),
                      make_record(1, {2.0, 2.0}, {3.5, 4.5})};
  const ComparisonRecord record = compare_schemes(series, series);
  for (double v : record.power_pct) CHECK(v == 0.0);
  for (double v : record.rate_pct) CHECK(v == 0.0);
}

TEST_CASE("doubling baseline power reads as minus fifty percent") {
  const Series a{make_record(0, {1.0, 1.0}, {2.0, 2.0})};
  const Series b{make_record(0, {2.0, 2.0}, {2.0, 2.0})};
  const ComparisonRecord record = compare_schemes(a, b);
  CHECK(record.power_pct[0] == doctest::Approx(-50.0));
  CHECK(record.rate_pct[0] == doctest::Approx(0.0));
}

TEST_CASE("mismatched series are rejected") {
  const Series a{make_record(0, {1.0}, {1.0})};
  const Series b{make_record(0, {1.0}, {1.0}), make_record(1, {1.0}, {1.0})};
  CHECK_THROWS_AS(compare_schemes(a, b), std::invalid_argument);
  const Series c{make_record(2, {1.0}, {1.0})};
  CHECK_THROWS_AS(compare_schemes(a, c), std::invalid_argument);
  const Series d{make_record(0, {1.0, 1.0}, {1.0, 1.0})};
  CHECK_THROWS_AS(compare_schemes(a, d), std::invalid_argument);
}

TEST_CASE("series CSV round-trips through the parser") {
  const Series series{make_record(0, {1.25, 2.5}, {0.5, 0.75}),
                      make_record(1, {1.0, 3.0}, {0.25, 1.5})};
  const Series back = series_from_csv(series_csv(series));
  REQUIRE(back.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back[k].step == series[k].step);
    CHECK(back[k].user_power == series[k].user_power);
    CHECK(back[k].user_rate == series[k].user_rate);
  }
  CHECK_THROWS_AS(series_from_csv("bad,header\n"), std::invalid_argument);
  CHECK_THROWS_AS(
      series_from_csv("step,iteration,user,power_w,rate_nats\n0,1,0,1.0,1.0\n"),
      std::invalid_argument);
  CHECK_THROWS_AS(series_from_csv("step,iteration,user,power_w,rate_nats\ngarbage\n"),
                  std::invalid_argument);
}

TEST_CASE("iteration-resolved CSVs collapse to the last iteration per step") {
  std::string text = "step,iteration,user,power_w,rate_nats\n";
  text += "0,0,1,5.0,1.0\n0,0,2,5.0,1.0\n";
  text += "0,7,1,2.0,3.0\n0,7,2,2.5,3.5\n";
  const Series series = series_from_csv(text);
  REQUIRE(series.size() == 1);
  CHECK(series[0].iterations == 7);
  CHECK(series[0].user_power == std::vector<double>{2.0, 2.5});
}

TEST_CASE("empty seed ensembles are a usage error naming the required fields") {
  ExperimentSpec spec = preset_spec(Preset::Fig1OpcConvergence);
  spec.num_seeds = 0;
  try {
    run_experiment(spec);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("seed") != std::string::npos);
    CHECK(what.find("num_seeds") != std::string::npos);
  }
}

TEST_CASE("config json overrides preset defaults") {
  const ExperimentSpec spec = spec_from_json(R"({
    "preset": "fig3_opc_vs_powermin",
    "num_seeds": 2,
    "steps": 3,
    "step_factor": 0.5,
    "varsigma": 1e-5,
    "out_dir": "x"
  })");
  CHECK(spec.preset == Preset::Fig3OpcVsPowerMin);
  CHECK(spec.num_seeds == 2);
  CHECK(spec.steps == 3);
  CHECK(spec.step_factor == 0.5);
  CHECK(spec.varsigma == 1e-5);
  CHECK(spec.num_subchannels == 20);  // preset default survives
  CHECK_THROWS_AS(spec_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(spec_from_json(R"({"preset": "nope"})"), std::invalid_argument);
}

TEST_CASE("a small ensemble writes decodable artifacts") {
  TempDir dir("fig3");
  ExperimentSpec spec = preset_spec(Preset::Fig3OpcVsPowerMin);
  spec.num_seeds = 2;
  spec.steps = 2;
  spec.num_subchannels = 8;
  spec.out_dir = (dir.path / "run").string();
  const std::string manifest = run_experiment(spec);
  CHECK(manifest.find("\"preset\": \"fig3_opc_vs_powermin\"") != std::string::npos);

  for (int seed = 1; seed <= 2; ++seed) {
    const fs::path base = dir.path / "run" / ("seed_" + std::to_string(seed));
    REQUIRE(fs::exists(base / "opportunistic.csv"));
    REQUIRE(fs::exists(base / "power_min.csv"));
    REQUIRE(fs::exists(base / "comparison.csv"));
    REQUIRE(fs::exists(base / "scenario.json"));

    // The comparison percentages recompute exactly from the raw CSVs.
    const Series opp = series_from_csv(slurp(base / "opportunistic.csv"));
    const Series pmin = series_from_csv(slurp(base / "power_min.csv"));
    const ComparisonRecord expected = compare_schemes(opp, pmin);
    const std::string stored = slurp(base / "comparison.csv");
    CHECK(stored == comparison_csv(expected));
  }
}

TEST_CASE("reruns with the same seed are bit-identical") {
  TempDir dir("determinism");
  ExperimentSpec spec = preset_spec(Preset::Fig5and6FixedVsProposedDegrade);
  spec.num_seeds = 1;
  spec.steps = 2;
  spec.base_seed = 17;
  spec.out_dir = (dir.path / "a").string();
  run_experiment(spec);
  spec.out_dir = (dir.path / "b").string();
  run_experiment(spec);

  for (const char* name : {"proposed.csv", "fixed.csv", "comparison.csv", "scenario.json"}) {
    const std::string a = slurp(dir.path / "a" / "seed_17" / name);
    const std::string b = slurp(dir.path / "b" / "seed_17" / name);
    CHECK(a == b);
  }
}

TEST_CASE("non-convergence is recorded, not fatal") {
  TempDir dir("nonconv");
  // Starve the iteration caps so nothing converges; the ensemble must still
  // complete and the manifest must say so.
  SUBCASE("opportunistic vs power-min") {
    ExperimentSpec spec = preset_spec(Preset::Fig3OpcVsPowerMin);
    spec.num_seeds = 1;
    spec.steps = 1;
    spec.num_subchannels = 6;
    spec.max_iterations = 2;
    spec.out_dir = (dir.path / "fig3").string();
    const std::string manifest = run_experiment(spec);
    CHECK(manifest.find("\"power_min_converged_all\": false") != std::string::npos);
    CHECK(manifest.find("\"seeds_used\": 0") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path / "fig3" / "seed_1" / "comparison.csv"));
    CHECK(fs::exists(dir.path / "fig3" / "seed_1" / "power_min.csv"));
  }
  SUBCASE("pricing comparison with a non-converged base") {
    ExperimentSpec spec = preset_spec(Preset::Fig5and6FixedVsProposedDegrade);
    spec.num_seeds = 1;
    spec.steps = 1;
    spec.max_iterations = 1;
    spec.out_dir = (dir.path / "fig56").string();
    const std::string manifest = run_experiment(spec);
    CHECK(manifest.find("\"base_converged\": false") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path / "fig56" / "seed_1" / "proposed.csv"));
  }
}

TEST_CASE("unwritable output directories surface as io errors") {
  ExperimentSpec spec = preset_spec(Preset::Fig1OpcConvergence);
  spec.num_seeds = 1;
  spec.num_subchannels = 4;
  spec.out_dir = "/proc/definitely/not/writable";
  CHECK_THROWS_AS(run_experiment(spec), IoError);
}

}  // TEST_SUITE
