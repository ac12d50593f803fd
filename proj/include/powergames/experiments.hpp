#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "powergames/engine.hpp"
#include "powergames/scenario.hpp"

namespace powergames {

/// Filesystem failures; the CLI maps these to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Preset {
  Fig1OpcConvergence,         // per-iteration powers/rates of the opportunistic game
  Fig2OpcDegradation,         // opportunistic game while one user's channel worsens
  Fig3OpcVsPowerMin,          // opportunistic vs rate-constrained power minimization
  Fig4PricingSweep,           // converged priced game across a price grid
  Fig5and6FixedVsProposedDegrade,  // interference pricing vs frozen pricing, worsening channel
  Fig7and8FixedVsProposedImprove,  // same comparison with an improving channel
  Custom,
};

const char* preset_name(Preset preset);
Preset preset_from_name(const std::string& name);  // std::invalid_argument on unknown names
std::vector<std::string> preset_names();

struct ExperimentSpec {
  Preset preset = Preset::Fig1OpcConvergence;
  std::uint64_t base_seed = 1;
  int num_seeds = 20;
  int steps = 4;
  double step_factor = 0.7;   // per-step direct-gain multiplier for the scaled user
  int num_users = 5;
  int num_subchannels = 20;
  double noise = 0.01;
  double cross_gain_ceiling = 0.1;
  double varsigma = 1e-6;      // opportunistic quadratic budget, all users
  double power_budget = 3.0;   // waterfilling budget, all users
  double price = 2000.0;       // pricing coefficient for the priced presets
  std::vector<double> lambda_grid;  // pricing sweep; preset default if empty
  double tolerance = 1e-8;
  int max_iterations = 10000;
  std::string out_dir = "out";
};

/// Preset defaults (dimensions, steps, factors) before CLI overrides.
ExperimentSpec preset_spec(Preset preset);
ExperimentSpec spec_from_json(const std::string& text);

/// Converged state of one game at one step of a protocol.
struct StepRecord {
  int step = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> user_power;
  std::vector<double> user_rate;

  double total_power() const;
  double total_rate() const;
};
using Series = std::vector<StepRecord>;

/// Signed per-step percentage differences of series `a` relative to series `b`.
struct ComparisonRecord {
  std::vector<int> steps;
  std::vector<double> power_pct;  // 100 * (Pa - Pb) / Pb
  std::vector<double> rate_pct;
};

/// Both series must cover the same steps in the same order.
ComparisonRecord compare_schemes(const Series& a, const Series& b);

std::string series_csv(const Series& series);
std::string comparison_csv(const ComparisonRecord& record);
Series series_from_csv(const std::string& text);

/// In-memory outputs of one seed of a preset: file name -> contents, plus a
/// manifest fragment. Pure function of (spec, seed), so ensemble members can
/// run concurrently.
struct SeedOutputs {
  std::map<std::string, std::string> files;
  std::string summary_json;
};

SeedOutputs run_preset_seed(const ExperimentSpec& spec, std::uint64_t seed);

/// Runs the whole seed ensemble, writes out_dir/seed_<s>/... and out_dir/manifest.json.
/// Returns the manifest text.
std::string run_experiment(const ExperimentSpec& spec);

}  // namespace powergames
