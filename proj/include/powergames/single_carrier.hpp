#pragma once

#include <span>

#include "powergames/scenario.hpp"

namespace powergames {

/// Target-SINR tracking update, computed as target * effective interference.
/// Identical to the classical ratio form on positive powers, and well defined
/// from an all-zero profile. Requires a single-carrier scenario (L = 1).
PowerProfile tpc_step(const Scenario& scenario, const PowerProfile& profile,
                      std::span<const double> targets);

/// Opportunistic update p_i <- constant_i / I_i; L = 1.
PowerProfile opc_step(const Scenario& scenario, const PowerProfile& profile,
                      std::span<const double> constants);

struct TpcFeasibility {
  bool feasible = false;
  double spectral_radius = 0.0;
};

/// Perron-Frobenius feasibility test: the targets are jointly reachable iff
/// rho(diag(targets) * F) < 1, F the normalized cross-gain matrix.
TpcFeasibility tpc_feasible(const Scenario& scenario, std::span<const double> targets);

}  // namespace powergames
