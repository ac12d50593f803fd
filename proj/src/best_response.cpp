#include "powergames/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace powergames {

namespace {

constexpr int kSortedPathLimit = 4096;
constexpr int kBisectionCap = 200;
constexpr double kBisectionRelTol = 1e-13;

void check_interference(std::span<const double> interference) {
  if (interference.empty())
    throw std::invalid_argument("best response: empty interference vector");
  for (double v : interference)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("best response: interference must be strictly positive");
}

// Components below 1e-15 x the largest one are noise from the active-set
// arithmetic; snap them so active sets report cleanly.
void snap_power_floor(std::vector<double>& powers) {
  double peak = 0.0;
  for (double v : powers) peak = std::max(peak, v);
  const double floor = 1e-15 * peak;
  for (double& v : powers)
    if (v < floor) v = 0.0;
}

double rate_of(std::span<const double> interference, std::span<const double> powers) {
  double rate = 0.0;
  for (std::size_t l = 0; l < interference.size(); ++l)
    rate += std::log1p(powers[l] / interference[l]);
  return rate;
}

// Monotone scalar bisection: f is decreasing, returns x with f(x) ~= target.
// Bracket must satisfy f(lo) >= target >= f(hi).
template <typename F>
double bisect_decreasing(F&& f, double lo, double hi, double target) {
  for (int it = 0; it < kBisectionCap && (hi - lo) > kBisectionRelTol * std::max(std::abs(hi), 1e-300);
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

namespace detail {

double water_level_sorted(std::span<const double> interference, double power_budget) {
  std::vector<double> sorted(interference.begin(), interference.end());
  std::sort(sorted.begin(), sorted.end());
  const int count = static_cast<int>(sorted.size());
  double prefix = 0.0;
  double level = 0.0;
  for (int k = 1; k <= count; ++k) {
    prefix += sorted[k - 1];
    const double candidate = (power_budget + prefix) / k;
    if (candidate > sorted[k - 1]) level = candidate;  // largest k with a positive fill wins
  }
  return level;
}

double water_level_bisect(std::span<const double> interference, double power_budget) {
  const auto [lo_it, hi_it] = std::minmax_element(interference.begin(), interference.end());
  const double lo = *lo_it;
  const double hi = *hi_it + power_budget;
  auto spill = [&](double level) {
    double total = 0.0;
    for (double v : interference) total += std::max(level - v, 0.0);
    return -total;  // negate so the map is decreasing in level
  };
  return bisect_decreasing(spill, lo, hi, -power_budget);
}

double rate_level_sorted(std::span<const double> interference, double rate_target) {
  std::vector<double> sorted(interference.begin(), interference.end());
  std::sort(sorted.begin(), sorted.end());
  const int count = static_cast<int>(sorted.size());
  double log_prefix = 0.0;
  double level = 0.0;
  for (int k = 1; k <= count; ++k) {
    log_prefix += std::log(sorted[k - 1]);
    const double candidate = std::exp((rate_target + log_prefix) / k);
    if (candidate > sorted[k - 1]) level = candidate;
  }
  return level;
}

double rate_level_bisect(std::span<const double> interference, double rate_target) {
  double lo = *std::min_element(interference.begin(), interference.end());
  double hi = lo;
  auto rate_at = [&](double level) {
    double rate = 0.0;
    for (double v : interference)
      if (level > v) rate += std::log(level / v);
    return -rate;
  };
  while (-rate_at(hi) < rate_target) hi *= 2.0;
  return bisect_decreasing(rate_at, lo, hi, -rate_target);
}

}  // namespace detail

Allocation br_opportunistic(std::span<const double> interference, double varsigma) {
  check_interference(interference);
  if (!(varsigma > 0.0)) throw std::invalid_argument("br_opportunistic: varsigma must be positive");
  double inv_sq_sum = 0.0;
  for (double v : interference) inv_sq_sum += 1.0 / (v * v);
  const double root = std::sqrt(inv_sq_sum);
  Allocation a;
  a.multiplier = 0.5 * std::sqrt(inv_sq_sum / varsigma);
  a.powers.resize(interference.size());
  const double scale = std::sqrt(varsigma) / root;
  for (std::size_t l = 0; l < interference.size(); ++l)
    a.powers[l] = scale / (interference[l] * interference[l]);
  a.objective = std::accumulate(a.powers.begin(), a.powers.end(), 0.0);
  return a;
}

Allocation br_power_min(std::span<const double> interference, double rate_target) {
  check_interference(interference);
  if (!(rate_target > 0.0))
    throw std::invalid_argument("br_power_min: rate target must be positive");
  const int count = static_cast<int>(interference.size());
  double level = count <= kSortedPathLimit ? detail::rate_level_sorted(interference, rate_target)
                                           : detail::rate_level_bisect(interference, rate_target);
  // Nudge the level up so the returned rate lands just above the target even
  // after rounding; the excess stays inside a 1e-9 relative band.
  int active = 0;
  for (double v : interference) active += level > v;
  const double nudge = std::max(rate_target * 2.5e-10 / std::max(active, 1), 1e-15);
  level *= 1.0 + nudge;
  Allocation a;
  a.multiplier = level;
  a.powers.resize(interference.size());
  for (std::size_t l = 0; l < interference.size(); ++l)
    a.powers[l] = std::max(level - interference[l], 0.0);
  snap_power_floor(a.powers);
  a.objective = std::accumulate(a.powers.begin(), a.powers.end(), 0.0);
  return a;
}

Allocation br_waterfill(std::span<const double> interference, double power_budget) {
  check_interference(interference);
  if (!(power_budget > 0.0))
    throw std::invalid_argument("br_waterfill: power budget must be positive");
  const int count = static_cast<int>(interference.size());
  const double level = count <= kSortedPathLimit
                           ? detail::water_level_sorted(interference, power_budget)
                           : detail::water_level_bisect(interference, power_budget);
  Allocation a;
  a.multiplier = 1.0 / level;
  a.powers.resize(interference.size());
  for (std::size_t l = 0; l < interference.size(); ++l)
    a.powers[l] = std::max(level - interference[l], 0.0);
  snap_power_floor(a.powers);
  a.objective = rate_of(interference, a.powers);
  return a;
}

namespace {

// Shared solver for rate maximization with linear per-subchannel prices under a
// total-power budget: p_l = [1/(mu + c_l) - I_l]^+ with mu >= 0 and either mu = 0
// and the budget slack, or mu > 0 and the budget tight. The all-zero price case
// is plain waterfilling and uses its exact water level.
Allocation priced_core(std::span<const double> interference, double power_budget,
                       std::span<const double> prices) {
  const std::size_t count = interference.size();
  const bool unpriced = std::all_of(prices.begin(), prices.end(), [](double c) { return c == 0.0; });
  if (unpriced) return br_waterfill(interference, power_budget);  // same budget multiplier

  auto power_at = [&](double mu) {
    double total = 0.0;
    for (std::size_t l = 0; l < count; ++l) {
      const double denom = mu + prices[l];
      if (denom <= 0.0) return std::numeric_limits<double>::infinity();
      total += std::max(1.0 / denom - interference[l], 0.0);
    }
    return total;
  };

  double mu = 0.0;
  if (power_at(0.0) > power_budget) {
    double hi = 0.0;
    for (std::size_t l = 0; l < count; ++l)
      hi = std::max(hi, 1.0 / interference[l] - prices[l]);
    mu = bisect_decreasing(power_at, 0.0, hi, power_budget);
  }

  Allocation a;
  a.multiplier = mu;
  a.powers.resize(count);
  for (std::size_t l = 0; l < count; ++l)
    a.powers[l] = std::max(1.0 / (mu + prices[l]) - interference[l], 0.0);
  snap_power_floor(a.powers);
  double priced_cost = 0.0;
  for (std::size_t l = 0; l < count; ++l) priced_cost += prices[l] * a.powers[l];
  a.objective = rate_of(interference, a.powers) - priced_cost;
  return a;
}

}  // namespace

Allocation br_priced(std::span<const double> interference, double power_budget, double price) {
  check_interference(interference);
  if (!(power_budget > 0.0)) throw std::invalid_argument("br_priced: power budget must be positive");
  if (!(price >= 0.0)) throw std::invalid_argument("br_priced: price must be nonnegative");
  std::vector<double> prices(interference.size());
  for (std::size_t l = 0; l < interference.size(); ++l) prices[l] = price * interference[l];
  return priced_core(interference, power_budget, prices);
}

Allocation br_fixed_priced(std::span<const double> interference, double power_budget,
                           std::span<const double> prices) {
  check_interference(interference);
  if (!(power_budget > 0.0))
    throw std::invalid_argument("br_fixed_priced: power budget must be positive");
  if (prices.size() != interference.size())
    throw std::invalid_argument("br_fixed_priced: price vector length mismatch");
  for (double c : prices)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("br_fixed_priced: prices must be nonnegative");
  return priced_core(interference, power_budget, prices);
}

double kkt_residual_opportunistic(std::span<const double> interference, double varsigma,
                                  const Allocation& a) {
  double residual = 0.0;
  double budget = 0.0;
  for (std::size_t l = 0; l < interference.size(); ++l) {
    const double pi = a.powers[l] * interference[l];
    budget += pi * pi;
    residual = std::max(residual,
                        std::abs(2.0 * a.multiplier * a.powers[l] * interference[l] * interference[l] - 1.0));
  }
  residual = std::max(residual, std::abs(budget - varsigma) / varsigma);
  if (!(a.multiplier > 0.0)) residual = std::numeric_limits<double>::infinity();
  return residual;
}

double kkt_residual_power_min(std::span<const double> interference, double rate_target,
                              const Allocation& a) {
  const double level = a.multiplier;
  double residual = 0.0;
  for (std::size_t l = 0; l < interference.size(); ++l) {
    if (a.powers[l] > 0.0)
      residual = std::max(residual, std::abs((interference[l] + a.powers[l]) / level - 1.0));
    else
      residual = std::max(residual, std::max(0.0, level / interference[l] - 1.0));
  }
  const double rate = rate_of(interference, a.powers);
  residual = std::max(residual, std::max(0.0, 1.0 - rate / rate_target));  // must meet the target
  residual = std::max(residual, std::max(0.0, rate / rate_target - 1.0 - 1e-8));
  return residual;
}

double kkt_residual_waterfill(std::span<const double> interference, double power_budget,
                              const Allocation& a) {
  const double mu = a.multiplier;
  double residual = 0.0;
  double total = 0.0;
  for (std::size_t l = 0; l < interference.size(); ++l) {
    total += a.powers[l];
    if (a.powers[l] > 0.0)
      residual = std::max(residual, std::abs(mu * (interference[l] + a.powers[l]) - 1.0));
    else
      residual = std::max(residual, std::max(0.0, 1.0 / (mu * interference[l]) - 1.0));
  }
  residual = std::max(residual, std::abs(total - power_budget) / power_budget);
  return residual;
}

namespace {

double kkt_residual_priced_core(std::span<const double> interference, double power_budget,
                                std::span<const double> prices, const Allocation& a) {
  const double mu = a.multiplier;
  double residual = 0.0;
  double total = 0.0;
  for (std::size_t l = 0; l < interference.size(); ++l) {
    total += a.powers[l];
    const double marginal = prices[l] + mu;
    if (a.powers[l] > 0.0)
      residual = std::max(residual, std::abs(marginal * (interference[l] + a.powers[l]) - 1.0));
    else
      residual = std::max(residual, std::max(0.0, 1.0 - marginal * interference[l]));
  }
  if (mu > 1e-300)
    residual = std::max(residual, std::abs(total - power_budget) / power_budget);
  else
    residual = std::max(residual, std::max(0.0, total / power_budget - 1.0));
  return residual;
}

}  // namespace

double kkt_residual_priced(std::span<const double> interference, double power_budget, double price,
                           const Allocation& a) {
  std::vector<double> prices(interference.size());
  for (std::size_t l = 0; l < interference.size(); ++l) prices[l] = price * interference[l];
  return kkt_residual_priced_core(interference, power_budget, prices, a);
}

double kkt_residual_fixed_priced(std::span<const double> interference, double power_budget,
                                 std::span<const double> prices, const Allocation& a) {
  return kkt_residual_priced_core(interference, power_budget, prices, a);
}

}  // namespace powergames
