#pragma once

#include <span>
#include <vector>

namespace powergames {

/// Result of a per-user optimal power allocation against frozen interference.
/// `multiplier` is the constraint multiplier at the optimum: the quadratic-budget
/// multiplier for the opportunistic game, the water level for power minimization,
/// and the budget multiplier for the waterfilling family.
struct Allocation {
  std::vector<double> powers;
  double multiplier = 0.0;
  double objective = 0.0;
};

/// Maximize total power subject to sum((p_l * I_l)^2) <= varsigma.
/// Closed form: p_l = sqrt(varsigma) / (I_l^2 * sqrt(sum_k I_k^-2)); the constraint
/// binds exactly and every component is strictly positive.
Allocation br_opportunistic(std::span<const double> interference, double varsigma);

/// Minimize total power subject to total rate >= rate_target (nats).
/// Water-filling form p_l = max(level - I_l, 0) with the rate constraint binding.
Allocation br_power_min(std::span<const double> interference, double rate_target);

/// Maximize total rate under sum(p) <= power_budget; classical waterfilling.
Allocation br_waterfill(std::span<const double> interference, double power_budget);

/// Rate maximization with interference-proportional pricing: the per-subchannel
/// price is price * I_l, giving p_l = max(1/(mu + price*I_l) - I_l, 0).
Allocation br_priced(std::span<const double> interference, double power_budget, double price);

/// Same objective with a frozen per-subchannel price vector c_l >= 0.
Allocation br_fixed_priced(std::span<const double> interference, double power_budget,
                           std::span<const double> prices);

// Scaled KKT residuals; every solver output satisfies its residual < 1e-8.
double kkt_residual_opportunistic(std::span<const double> interference, double varsigma,
                                  const Allocation& a);
double kkt_residual_power_min(std::span<const double> interference, double rate_target,
                              const Allocation& a);
double kkt_residual_waterfill(std::span<const double> interference, double power_budget,
                              const Allocation& a);
double kkt_residual_priced(std::span<const double> interference, double power_budget,
                           double price, const Allocation& a);
double kkt_residual_fixed_priced(std::span<const double> interference, double power_budget,
                                 std::span<const double> prices, const Allocation& a);

namespace detail {

// Both water-level routes are exposed so tests can assert their agreement.
// The sorted route is exact; solvers use it up to 4096 subchannels and fall
// back to bisection beyond that.
double water_level_sorted(std::span<const double> interference, double power_budget);
double water_level_bisect(std::span<const double> interference, double power_budget);
double rate_level_sorted(std::span<const double> interference, double rate_target);
double rate_level_bisect(std::span<const double> interference, double rate_target);

}  // namespace detail

}  // namespace powergames
