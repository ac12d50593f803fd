#include "powergames/single_carrier.hpp"

#include <cmath>
#include <stdexcept>

#include "powergames/analysis.hpp"

namespace powergames {

namespace {

void check_single_carrier(const Scenario& scenario, std::size_t params, const char* what) {
  if (scenario.num_subchannels != 1)
    throw std::invalid_argument(std::string(what) + ": single-carrier scenarios only (L = 1)");
  if (static_cast<int>(params) != scenario.num_users)
    throw std::invalid_argument(std::string(what) + ": parameter vector length mismatch");
}

}  // namespace

PowerProfile tpc_step(const Scenario& scenario, const PowerProfile& profile,
                      std::span<const double> targets) {
  check_single_carrier(scenario, targets.size(), "tpc_step");
  scenario.check_profile(profile);
  PowerProfile next = PowerProfile::zeros(scenario.num_users, 1);
  for (int i = 0; i < scenario.num_users; ++i)
    next.at(i, 0) = targets[i] * effective_interference(scenario, profile, i, 0);
  return next;
}

PowerProfile opc_step(const Scenario& scenario, const PowerProfile& profile,
                      std::span<const double> constants) {
  check_single_carrier(scenario, constants.size(), "opc_step");
  scenario.check_profile(profile);
  PowerProfile next = PowerProfile::zeros(scenario.num_users, 1);
  for (int i = 0; i < scenario.num_users; ++i)
    next.at(i, 0) = constants[i] / effective_interference(scenario, profile, i, 0);
  return next;
}

TpcFeasibility tpc_feasible(const Scenario& scenario, std::span<const double> targets) {
  check_single_carrier(scenario, targets.size(), "tpc_feasible");
  Matrix scaled_gains = Matrix::zero(scenario.num_users);
  for (int i = 0; i < scenario.num_users; ++i)
    for (int j = 0; j < scenario.num_users; ++j)
      if (i != j) scaled_gains.at(i, j) = targets[i] * scenario.g_hat(i, j, 0);
  TpcFeasibility result;
  result.spectral_radius = spectral_radius(scaled_gains);
  result.feasible = result.spectral_radius < 1.0;
  return result;
}

}  // namespace powergames
