#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace powergames {

/// M x L matrix of transmit powers in Watts. Single-carrier problems use L = 1.
struct PowerProfile {
  int num_users = 0;
  int num_subchannels = 0;
  std::vector<double> p;  // row-major [user][subchannel]

  static PowerProfile zeros(int num_users, int num_subchannels);
  static PowerProfile constant(int num_users, int num_subchannels, double value);

  double& at(int user, int subchannel);
  double at(int user, int subchannel) const;

  /// sup-norm of the entrywise difference; profiles must have equal dimensions.
  double sup_distance(const PowerProfile& other) const;
  double max_abs() const;

  bool operator==(const PowerProfile&) const = default;
};

/// Interference network in normalized form: direct gains are 1, so the stored
/// cross gains and noise are the hat-quantities every game formula consumes.
/// Raw-gain input is normalized on construction.
struct Scenario {
  int num_users = 0;
  int num_subchannels = 0;
  std::vector<double> cross_gain;  // [rx][tx][subchannel], diagonal entries == 1
  std::vector<double> noise;       // [rx][subchannel], strictly positive
  std::optional<std::uint64_t> seed;

  /// Normalized gain from transmitter tx into receiver rx on subchannel l.
  double g_hat(int rx, int tx, int l) const;
  /// Normalized noise power at receiver rx on subchannel l.
  double eta_hat(int rx, int l) const;

  double& g_hat_ref(int rx, int tx, int l);
  double& eta_hat_ref(int rx, int l);

  static Scenario normalized(int num_users, int num_subchannels,
                             std::vector<double> cross_gain, std::vector<double> noise);
  /// Builds from raw (un-normalized) gains and noise; direct gains must be > 0.
  static Scenario from_raw(int num_users, int num_subchannels,
                           const std::vector<double>& gain, const std::vector<double>& noise);

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;

  void check_user(int user) const;
  void check_subchannel(int subchannel) const;
  void check_profile(const PowerProfile& profile) const;
};

/// Per-user game parameters; a game validates the fields it needs.
struct UserParams {
  std::optional<double> varsigma;      // weighted-power budget, Watts^2
  std::optional<double> rate_target;   // nats
  std::optional<double> power_budget;  // Watts
  std::optional<double> price;         // pricing coefficient, per Watt^2
  std::optional<double> target_sinr;   // dimensionless
  std::optional<double> opc_constant;  // Watts^2
};

/// Effective interference seen by `user` on `subchannel`:
/// sum of normalized cross gains times the other users' powers, plus normalized noise.
double effective_interference(const Scenario& scenario, const PowerProfile& profile,
                              int user, int subchannel);

/// SINR = own power divided by effective interference; zero iff the power is zero.
double sinr(const Scenario& scenario, const PowerProfile& profile, int user, int subchannel);

/// Total rate of a user across subchannels, in nats: sum of ln(1 + SINR).
double user_rate(const Scenario& scenario, const PowerProfile& profile, int user);

/// Random network: cross gains into receiver i drawn uniformly from
/// (0, cross_gain_ceiling / (i+1)), direct gains 1, flat noise. Deterministic in the seed.
Scenario generate_scenario(std::uint64_t seed, int num_users, int num_subchannels,
                           double cross_gain_ceiling = 0.1, double noise_level = 0.01);

/// Scales one user's direct channel gains by `factor` (> 0). In normalized form this
/// divides that receiver's cross gains and noise by `factor`; interference caused to
/// other users is unchanged.
Scenario scale_user_channels(const Scenario& scenario, int user, double factor);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(std::string_view text);

}  // namespace powergames
