#include "powergames/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "powergames/analysis.hpp"
#include "powergames/best_response.hpp"
#include "powergames/random.hpp"
#include "powergames/single_carrier.hpp"

namespace powergames {

using nlohmann::json;

const char* game_kind_name(GameKind kind) {
  switch (kind) {
    case GameKind::Opportunistic: return "opportunistic";
    case GameKind::PowerMin: return "power_min";
    case GameKind::Waterfilling: return "waterfilling";
    case GameKind::PricedWaterfilling: return "priced_waterfilling";
    case GameKind::FixedPricedWaterfilling: return "fixed_priced_waterfilling";
    case GameKind::Tpc: return "tpc";
    case GameKind::Opc: return "opc";
  }
  return "unknown";
}

namespace {

double require(const std::optional<double>& field, const char* name) {
  if (!field || !(*field > 0.0))
    throw std::invalid_argument(std::string("game config: user parameter '") + name +
                                "' missing or nonpositive");
  return *field;
}

void validate_config(const Scenario& scenario, const GameConfig& config) {
  if (static_cast<int>(config.users.size()) != scenario.num_users)
    throw std::invalid_argument("game config: one UserParams entry per user required");
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("game config: tolerance must be positive");
  if (config.max_iterations < 1)
    throw std::invalid_argument("game config: max_iterations must be at least 1");
  if (config.kind == GameKind::Tpc || config.kind == GameKind::Opc) {
    if (scenario.num_subchannels != 1)
      throw std::invalid_argument("game config: TPC/OPC require a single-carrier scenario");
  }
  if (config.kind == GameKind::FixedPricedWaterfilling) {
    if (config.fixed_prices.size() !=
        static_cast<std::size_t>(scenario.num_users) * scenario.num_subchannels)
      throw std::invalid_argument("game config: fixed_prices must be an M x L table");
    for (double c : config.fixed_prices)
      if (!(c >= 0.0) || !std::isfinite(c))
        throw std::invalid_argument("game config: fixed prices must be nonnegative");
  }
  for (int i = 0; i < scenario.num_users; ++i) {
    const UserParams& u = config.users[i];
    switch (config.kind) {
      case GameKind::Opportunistic: require(u.varsigma, "varsigma"); break;
      case GameKind::PowerMin: require(u.rate_target, "rate_target"); break;
      case GameKind::Waterfilling: require(u.power_budget, "power_budget"); break;
      case GameKind::PricedWaterfilling:
        require(u.power_budget, "power_budget");
        if (!u.price || !(*u.price >= 0.0))
          throw std::invalid_argument("game config: 'price' missing or negative");
        break;
      case GameKind::FixedPricedWaterfilling: require(u.power_budget, "power_budget"); break;
      case GameKind::Tpc: require(u.target_sinr, "target_sinr"); break;
      case GameKind::Opc: require(u.opc_constant, "opc_constant"); break;
    }
  }
}

std::vector<double> interference_row(const Scenario& scenario, const PowerProfile& profile,
                                     int user) {
  std::vector<double> row(scenario.num_subchannels);
  for (int l = 0; l < scenario.num_subchannels; ++l)
    row[l] = effective_interference(scenario, profile, user, l);
  return row;
}

Allocation best_response_for(const Scenario& scenario, const GameConfig& config,
                             const PowerProfile& previous, int user) {
  const std::vector<double> interference = interference_row(scenario, previous, user);
  const UserParams& u = config.users[user];
  switch (config.kind) {
    case GameKind::Opportunistic:
      return br_opportunistic(interference, *u.varsigma);
    case GameKind::PowerMin:
      return br_power_min(interference, *u.rate_target);
    case GameKind::Waterfilling:
      return br_waterfill(interference, *u.power_budget);
    case GameKind::PricedWaterfilling:
      return br_priced(interference, *u.power_budget, *u.price);
    case GameKind::FixedPricedWaterfilling: {
      const std::span<const double> prices(
          config.fixed_prices.data() + static_cast<std::size_t>(user) * scenario.num_subchannels,
          static_cast<std::size_t>(scenario.num_subchannels));
      return br_fixed_priced(interference, *u.power_budget, prices);
    }
    case GameKind::Tpc: {
      Allocation a;
      a.powers = {*u.target_sinr * interference[0]};
      return a;
    }
    case GameKind::Opc: {
      Allocation a;
      a.powers = {*u.opc_constant / interference[0]};
      return a;
    }
  }
  throw std::logic_error("unreachable game kind");
}

double kkt_residual_for(const Scenario& scenario, const GameConfig& config,
                        const PowerProfile& profile, int user) {
  const std::vector<double> interference = interference_row(scenario, profile, user);
  const UserParams& u = config.users[user];
  Allocation a;
  a.powers.assign(profile.p.begin() + static_cast<std::size_t>(user) * scenario.num_subchannels,
                  profile.p.begin() + static_cast<std::size_t>(user + 1) * scenario.num_subchannels);
  switch (config.kind) {
    case GameKind::Opportunistic: {
      // Recover the multiplier from the closed form before checking stationarity.
      double inv_sq = 0.0;
      for (double v : interference) inv_sq += 1.0 / (v * v);
      a.multiplier = 0.5 * std::sqrt(inv_sq / *u.varsigma);
      return kkt_residual_opportunistic(interference, *u.varsigma, a);
    }
    case GameKind::PowerMin: {
      const Allocation fresh = br_power_min(interference, *u.rate_target);
      a.multiplier = fresh.multiplier;
      return kkt_residual_power_min(interference, *u.rate_target, a);
    }
    case GameKind::Waterfilling: {
      const Allocation fresh = br_waterfill(interference, *u.power_budget);
      a.multiplier = fresh.multiplier;
      return kkt_residual_waterfill(interference, *u.power_budget, a);
    }
    case GameKind::PricedWaterfilling: {
      const Allocation fresh = br_priced(interference, *u.power_budget, *u.price);
      a.multiplier = fresh.multiplier;
      return kkt_residual_priced(interference, *u.power_budget, *u.price, a);
    }
    case GameKind::FixedPricedWaterfilling: {
      const std::span<const double> prices(
          config.fixed_prices.data() + static_cast<std::size_t>(user) * scenario.num_subchannels,
          static_cast<std::size_t>(scenario.num_subchannels));
      const Allocation fresh = br_fixed_priced(interference, *u.power_budget, prices);
      a.multiplier = fresh.multiplier;
      return kkt_residual_fixed_priced(interference, *u.power_budget, prices, a);
    }
    case GameKind::Tpc:
      return std::abs(a.powers[0] / (*u.target_sinr * interference[0]) - 1.0);
    case GameKind::Opc:
      return std::abs(a.powers[0] * interference[0] / *u.opc_constant - 1.0);
  }
  throw std::logic_error("unreachable game kind");
}

double constraint_slack_for(const Scenario& scenario, const GameConfig& config,
                            const PowerProfile& profile, int user) {
  const UserParams& u = config.users[user];
  switch (config.kind) {
    case GameKind::Opportunistic: {
      double q = 0.0;
      for (int l = 0; l < scenario.num_subchannels; ++l) {
        const double pi = profile.at(user, l) * effective_interference(scenario, profile, user, l);
        q += pi * pi;
      }
      return *u.varsigma - q;
    }
    case GameKind::PowerMin:
      return user_rate(scenario, profile, user) - *u.rate_target;
    case GameKind::Waterfilling:
    case GameKind::PricedWaterfilling:
    case GameKind::FixedPricedWaterfilling: {
      double total = 0.0;
      for (int l = 0; l < scenario.num_subchannels; ++l) total += profile.at(user, l);
      return *u.power_budget - total;
    }
    case GameKind::Tpc:
      return sinr(scenario, profile, user, 0) - *u.target_sinr;
    case GameKind::Opc:
      return *u.opc_constant -
             profile.at(user, 0) * effective_interference(scenario, profile, user, 0);
  }
  throw std::logic_error("unreachable game kind");
}

}  // namespace

double power_scale(const Scenario& scenario, const GameConfig& config) {
  double eta_min = std::numeric_limits<double>::infinity();
  double eta_max = 0.0;
  for (double v : scenario.noise) {
    eta_min = std::min(eta_min, v);
    eta_max = std::max(eta_max, v);
  }
  double scale = 0.0;
  for (const UserParams& u : config.users) {
    switch (config.kind) {
      case GameKind::Opportunistic: scale = std::max(scale, std::sqrt(*u.varsigma) / eta_min); break;
      case GameKind::PowerMin:
        // Flat allocation hitting the target on the worst noise floor.
        scale = std::max(scale, scenario.num_subchannels * eta_max *
                                    std::expm1(*u.rate_target / scenario.num_subchannels));
        break;
      case GameKind::Waterfilling:
      case GameKind::PricedWaterfilling:
      case GameKind::FixedPricedWaterfilling:
        scale = std::max(scale, *u.power_budget);
        break;
      case GameKind::Tpc: scale = std::max(scale, *u.target_sinr * eta_max); break;
      case GameKind::Opc: scale = std::max(scale, *u.opc_constant / eta_min); break;
    }
  }
  return std::max(scale, std::numeric_limits<double>::min());
}

PowerProfile sweep(const Scenario& scenario, const GameConfig& config,
                   const PowerProfile& previous) {
  scenario.check_profile(previous);
  PowerProfile next = PowerProfile::zeros(scenario.num_users, scenario.num_subchannels);
  // Every user responds to the frozen previous profile and owns one output
  // row, so the parallel schedule cannot change the result. Exceptions must
  // not unwind through the parallel region; the first one is rethrown after.
  std::exception_ptr error;
  if (config.sweep_mode == SweepMode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < scenario.num_users; ++i) {
      try {
        const Allocation a = best_response_for(scenario, config, previous, i);
        for (int l = 0; l < scenario.num_subchannels; ++l) next.at(i, l) = a.powers[l];
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < scenario.num_users; ++i) {
      const Allocation a = best_response_for(scenario, config, previous, i);
      for (int l = 0; l < scenario.num_subchannels; ++l) next.at(i, l) = a.powers[l];
    }
  }
  if (error) std::rethrow_exception(error);
  return next;
}

namespace {

PowerProfile initial_profile(const Scenario& scenario, const GameConfig& config) {
  const int m = scenario.num_users;
  const int l = scenario.num_subchannels;
  switch (config.init) {
    case InitRule::Zeros:
      return PowerProfile::zeros(m, l);
    case InitRule::SmallUniform:
      return PowerProfile::constant(m, l, 1e-3 * power_scale(scenario, config));
    case InitRule::UniformRandom: {
      if (!(config.init_spread > 0.0))
        throw std::invalid_argument("game config: init_spread must be positive");
      PowerProfile profile = PowerProfile::zeros(m, l);
      std::mt19937_64 rng(config.init_seed);
      const double hi = config.init_spread * power_scale(scenario, config);
      for (double& v : profile.p) v = hi * uniform01(rng);
      return profile;
    }
    case InitRule::Explicit:
      scenario.check_profile(config.explicit_init);
      for (double v : config.explicit_init.p)
        if (!(v >= 0.0) || !std::isfinite(v))
          throw std::invalid_argument("game config: explicit initial powers must be nonnegative");
      return config.explicit_init;
  }
  throw std::logic_error("unreachable init rule");
}

// The applicable sufficient condition for uniqueness/convergence, when one
// exists for the configured game.
std::optional<ConditionCrossCheck> condition_cross_check(const Scenario& scenario,
                                                         const GameConfig& config) {
  const int m = scenario.num_users;
  switch (config.kind) {
    case GameKind::Opportunistic: {
      std::vector<double> varsigma(m);
      for (int i = 0; i < m; ++i) varsigma[i] = *config.users[i].varsigma;
      const BoundSet bounds = compute_bounds(scenario, varsigma);
      const ConditionMatrix a = matrix_A(scenario, bounds, varsigma);
      return ConditionCrossCheck{"opportunistic_p_matrix", !a.degenerate && is_p_matrix(a.m)};
    }
    case GameKind::Waterfilling:
    case GameKind::PricedWaterfilling: {
      std::vector<double> budgets(m), prices(m, 0.0);
      for (int i = 0; i < m; ++i) {
        budgets[i] = *config.users[i].power_budget;
        if (config.kind == GameKind::PricedWaterfilling) prices[i] = *config.users[i].price;
      }
      const ConditionMatrix d = matrix_D(scenario, budgets, prices);
      return ConditionCrossCheck{"priced_p_matrix", is_p_matrix(d.m)};
    }
    case GameKind::Tpc: {
      std::vector<double> targets(m);
      for (int i = 0; i < m; ++i) targets[i] = *config.users[i].target_sinr;
      return ConditionCrossCheck{"tpc_feasibility", tpc_feasible(scenario, targets).feasible};
    }
    default:
      return std::nullopt;  // no applicable sufficient condition
  }
}

void record_point(RunResult& result, const Scenario& scenario, const GameConfig& config,
                  const PowerProfile& profile, int iteration, bool force = false) {
  if (!config.record_trajectory) return;
  // Every sweep early on, every 10th later; plots need shape, not every sweep.
  if (!force && iteration > 100 && iteration % 10 != 0) return;
  TrajectoryPoint point;
  point.iteration = iteration;
  point.user_power.resize(scenario.num_users);
  point.user_rate.resize(scenario.num_users);
  for (int i = 0; i < scenario.num_users; ++i) {
    double total = 0.0;
    for (int l = 0; l < scenario.num_subchannels; ++l) total += profile.at(i, l);
    point.user_power[i] = total;
    point.user_rate[i] = user_rate(scenario, profile, i);
  }
  result.trajectory.push_back(std::move(point));
}

}  // namespace

RunResult run(const Scenario& scenario, const GameConfig& config) {
  validate_config(scenario, config);
  RunResult result;
  result.condition = condition_cross_check(scenario, config);
  result.profile = initial_profile(scenario, config);
  record_point(result, scenario, config, result.profile, 0);

  const double guard = 1e9 * power_scale(scenario, config);
  for (int n = 1; n <= config.max_iterations; ++n) {
    PowerProfile next = sweep(scenario, config, result.profile);
    result.iterations = n;

    bool out_of_range = false;
    for (double v : next.p)
      if (!std::isfinite(v) || v > guard) out_of_range = true;
    if (out_of_range) {
      result.diverged = true;
      result.profile = std::move(next);
      break;
    }

    const double scale = std::max({result.profile.max_abs(), next.max_abs(), 1e-15});
    result.last_change = result.profile.sup_distance(next) / scale;
    result.profile = std::move(next);
    record_point(result, scenario, config, result.profile, n);
    if (result.last_change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (config.record_trajectory && !result.diverged &&
      (result.trajectory.empty() || result.trajectory.back().iteration != result.iterations))
    record_point(result, scenario, config, result.profile, result.iterations, /*force=*/true);

  result.users.resize(scenario.num_users);
  if (!result.diverged) {
    for (int i = 0; i < scenario.num_users; ++i) {
      UserSummary& s = result.users[i];
      s.total_power = 0.0;
      for (int l = 0; l < scenario.num_subchannels; ++l) s.total_power += result.profile.at(i, l);
      s.total_rate = user_rate(scenario, result.profile, i);
      s.constraint_slack = constraint_slack_for(scenario, config, result.profile, i);
      result.max_kkt_residual =
          std::max(result.max_kkt_residual, kkt_residual_for(scenario, config, result.profile, i));
    }
  }
  return result;
}

UniquenessReport uniqueness_probe(const Scenario& scenario, const GameConfig& config,
                                  int num_starts, double spread) {
  if (num_starts < 2) throw std::invalid_argument("uniqueness_probe: need at least two starts");
  std::vector<PowerProfile> finals;
  UniquenessReport report;
  report.num_starts = num_starts;
  report.condition = condition_cross_check(scenario, config);
  for (int s = 0; s < num_starts; ++s) {
    GameConfig probe = config;
    probe.init = InitRule::UniformRandom;
    probe.init_seed = config.init_seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(s + 1);
    probe.init_spread = spread;
    probe.record_trajectory = false;
    const RunResult r = run(scenario, probe);
    if (r.converged) {
      ++report.num_converged;
      finals.push_back(r.profile);
    }
  }
  report.all_converged = report.num_converged == num_starts;
  for (std::size_t a = 0; a < finals.size(); ++a)
    for (std::size_t b = a + 1; b < finals.size(); ++b)
      report.max_pairwise_distance =
          std::max(report.max_pairwise_distance, finals[a].sup_distance(finals[b]));
  return report;
}

std::vector<double> freeze_fixed_prices(const Scenario& scenario, const RunResult& result,
                                        std::span<const double> prices) {
  if (!result.converged)
    throw std::invalid_argument("freeze_fixed_prices: run did not converge");
  if (static_cast<int>(prices.size()) != scenario.num_users)
    throw std::invalid_argument("freeze_fixed_prices: one price per user required");
  std::vector<double> frozen(static_cast<std::size_t>(scenario.num_users) *
                             scenario.num_subchannels);
  for (int i = 0; i < scenario.num_users; ++i)
    for (int l = 0; l < scenario.num_subchannels; ++l)
      frozen[static_cast<std::size_t>(i) * scenario.num_subchannels + l] =
          prices[i] * effective_interference(scenario, result.profile, i, l);
  return frozen;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string trajectory_csv(const RunResult& result) {
  std::string out = "iteration,user,total_power_w,total_rate_nats\n";
  for (const TrajectoryPoint& point : result.trajectory) {
    for (std::size_t i = 0; i < point.user_power.size(); ++i) {
      out += std::to_string(point.iteration);
      out += ',';
      out += std::to_string(i + 1);  // users are 1-based in outputs
      out += ',';
      out += format_double(point.user_power[i]);
      out += ',';
      out += format_double(point.user_rate[i]);
      out += '\n';
    }
  }
  return out;
}

std::string run_summary_json(const RunResult& result) {
  json users = json::array();
  for (const UserSummary& s : result.users)
    users.push_back({{"total_power_w", s.total_power},
                     {"total_rate_nats", s.total_rate},
                     {"constraint_slack", s.constraint_slack}});
  json doc{{"schema_version", 1},
           {"converged", result.converged},
           {"diverged", result.diverged},
           {"iterations", result.iterations},
           {"last_relative_change", result.last_change},
           {"max_kkt_residual", result.max_kkt_residual},
           {"users", std::move(users)}};
  if (result.condition)
    doc["condition"] = {{"name", result.condition->name},
                        {"pass", result.condition->pass},
                        {"note", "sufficient only; failing certifies nothing"}};
  return doc.dump(2);
}

}  // namespace powergames
