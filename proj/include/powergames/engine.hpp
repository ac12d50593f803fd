#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "powergames/scenario.hpp"

namespace powergames {

enum class GameKind {
  Opportunistic,
  PowerMin,
  Waterfilling,
  PricedWaterfilling,
  FixedPricedWaterfilling,
  Tpc,
  Opc,
};

const char* game_kind_name(GameKind kind);

/// Jacobi sweeps only: every user responds to the same previous profile. The
/// OpenMP mode distributes users across threads; each reads the frozen previous
/// profile and writes a disjoint row, so both modes produce bit-identical
/// trajectories. Serial is the reference implementation kept for testing.
enum class SweepMode { Serial, OpenMP };

enum class InitRule {
  SmallUniform,   // 1e-3 x game power scale on every entry (default)
  Zeros,
  UniformRandom,  // uniform(0, spread x power scale), seeded
  Explicit,
};

struct GameConfig {
  GameKind kind = GameKind::Opportunistic;
  std::vector<UserParams> users;
  InitRule init = InitRule::SmallUniform;
  std::uint64_t init_seed = 0;
  double init_spread = 1.0;
  PowerProfile explicit_init;
  double tolerance = 1e-8;     // relative sup-norm on powers
  int max_iterations = 10000;
  bool record_trajectory = false;
  std::vector<double> fixed_prices;  // [user][subchannel], FixedPricedWaterfilling only
  SweepMode sweep_mode = SweepMode::OpenMP;
};

struct TrajectoryPoint {
  int iteration = 0;
  std::vector<double> user_power;  // per-user totals at this sweep
  std::vector<double> user_rate;
};

struct UserSummary {
  double total_power = 0.0;
  double total_rate = 0.0;
  // Remaining slack in the user's own constraint; ~0 where the game binds it.
  double constraint_slack = 0.0;
};

/// Which sufficient condition applies to the game on this scenario and whether
/// it held. Advisory: the engine runs either way, and a failing condition
/// certifies nothing (the tests are sufficient, not necessary).
struct ConditionCrossCheck {
  std::string name;
  bool pass = false;
};

struct RunResult {
  PowerProfile profile;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double last_change = 0.0;
  double max_kkt_residual = 0.0;
  std::vector<UserSummary> users;
  std::vector<TrajectoryPoint> trajectory;  // decimated; empty unless recording
  std::optional<ConditionCrossCheck> condition;  // games without one leave it empty
};

/// Characteristic power magnitude of a game on a scenario; used for the
/// small-uniform initial profile (1e-3 x scale) and the divergence guard (1e9 x scale).
double power_scale(const Scenario& scenario, const GameConfig& config);

/// One simultaneous best-response sweep against `previous`.
PowerProfile sweep(const Scenario& scenario, const GameConfig& config,
                   const PowerProfile& previous);

/// Iterates sweeps until the relative sup-norm change drops below the tolerance,
/// the iteration cap is hit, or a power exceeds the divergence guard. A converged
/// profile is a fixed point: every user's recomputed best response passes its KKT
/// residual check against the final interference.
RunResult run(const Scenario& scenario, const GameConfig& config);

struct UniquenessReport {
  int num_starts = 0;
  int num_converged = 0;
  bool all_converged = false;
  double max_pairwise_distance = 0.0;  // sup-norm among converged profiles
  std::optional<ConditionCrossCheck> condition;  // small spreads corroborate a passing one
};

/// Runs the game from `num_starts` random initial profiles and reports how far
/// apart the converged profiles ended up. Small distances corroborate (never
/// prove) uniqueness.
UniquenessReport uniqueness_probe(const Scenario& scenario, const GameConfig& config,
                                  int num_starts, double spread);

/// Per-subchannel prices price_i * I_i^l frozen at a converged priced run;
/// seeds FixedPricedWaterfilling comparisons. Throws if the run did not converge.
std::vector<double> freeze_fixed_prices(const Scenario& scenario, const RunResult& result,
                                        std::span<const double> prices);

/// CSV with header iteration,user,total_power_w,total_rate_nats.
std::string trajectory_csv(const RunResult& result);
std::string run_summary_json(const RunResult& result);

}  // namespace powergames
