#include <stdexcept>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "powergames/best_response.hpp"
#include "powergames/random.hpp"

using namespace powergames;

namespace {

std::vector<double> random_interference(std::mt19937_64& rng, int count, double lo = 0.05,
                                        double hi = 3.0) {
  std::vector<double> interference(count);
  for (double& v : interference) v = uniform(rng, lo, hi);
  return interference;
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double rate_objective(std::span<const double> interference, std::span<const double> powers) {
  double rate = 0.0;
  for (std::size_t l = 0; l < interference.size(); ++l)
    rate += std::log1p(powers[l] / interference[l]);
  return rate;
}

}  // namespace

TEST_SUITE("best_response") {

TEST_CASE("opportunistic closed form, hand values") {
  SUBCASE("single subchannel: (p*I)^2 = varsigma") {
    const std::vector<double> interference{2.0};
    const Allocation a = br_opportunistic(interference, 4.0);
    CHECK(a.powers[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("two equal subchannels split the budget symmetrically") {
    const std::vector<double> interference{1.0, 1.0};
    const Allocation a = br_opportunistic(interference, 2.0);
    CHECK(a.powers[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.powers[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("opportunistic closed form agrees with multiplier bisection and the grid") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> interference = random_interference(rng, 5);
    const double varsigma = uniform(rng, 0.5, 4.0);
    const Allocation a = br_opportunistic(interference, varsigma);

    const std::vector<double> by_bisection =
        oracles::opportunistic_by_bisection(interference, varsigma);
    for (int l = 0; l < 5; ++l)
      CHECK(a.powers[l] == doctest::Approx(by_bisection[l]).epsilon(1e-9));

    double budget = 0.0;
    for (int l = 0; l < 5; ++l) {
      const double pi = a.powers[l] * interference[l];
      budget += pi * pi;
    }
    CHECK(budget == doctest::Approx(varsigma).epsilon(1e-10));
    CHECK(kkt_residual_opportunistic(interference, varsigma, a) < 1e-10);
  }
  // Grid cross-check on a few instances (box in x = p*I space, ~1e5 points).
  for (int trial = 0; trial < 3; ++trial) {
    const std::vector<double> interference = random_interference(rng, 3, 0.2, 2.0);
    const double varsigma = uniform(rng, 0.5, 2.0);
    const Allocation a = br_opportunistic(interference, varsigma);
    const int K = 46;
    const double grid_best = oracles::grid_max_opportunistic(interference, varsigma, K);
    CHECK(grid_best <= a.objective * (1.0 + 1e-9));
    double slack = 0.0;
    for (double v : interference) slack += (std::sqrt(varsigma) / K) / v;
    CHECK(a.objective - grid_best <= slack);
  }
}

TEST_CASE("opportunistic power strictly decreases in its own interference") {
  std::mt19937_64 rng(23);
  const std::vector<double> interference = random_interference(rng, 4);
  const double varsigma = 1.7;
  const Allocation base = br_opportunistic(interference, varsigma);
  std::vector<double> worse = interference;
  worse[2] *= 1.25;
  const Allocation bumped = br_opportunistic(worse, varsigma);
  CHECK(bumped.powers[2] < base.powers[2]);
}

TEST_CASE("power minimization hand values") {
  SUBCASE("single subchannel") {
    const std::vector<double> interference{1.0};
    const Allocation a = br_power_min(interference, std::log(2.0));
    CHECK(a.powers[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("two symmetric subchannels, level 2") {
    const std::vector<double> interference{1.0, 1.0};
    const Allocation a = br_power_min(interference, 2.0 * std::log(2.0));
    CHECK(a.powers[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.powers[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.multiplier == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("power minimization meets the target from above and beats the grid") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> interference = random_interference(rng, 6, 0.1, 2.0);
    const double target = uniform(rng, 0.4, 3.0);
    const Allocation a = br_power_min(interference, target);
    const double rate = rate_objective(interference, a.powers);
    CHECK(rate >= target);
    CHECK(rate <= target * (1.0 + 1e-9));
    CHECK(kkt_residual_power_min(interference, target, a) < 1e-8);
  }
  for (int trial = 0; trial < 3; ++trial) {
    const std::vector<double> interference = random_interference(rng, 3, 0.2, 1.0);
    const double target = uniform(rng, 0.5, 1.5);
    const Allocation a = br_power_min(interference, target);
    const double ceiling =
        *std::min_element(interference.begin(), interference.end()) * std::exp(target);
    const int K = 46;
    const double grid_best =
        oracles::grid_min_power_for_rate(interference, target, ceiling, K);
    CHECK(std::abs(a.objective - grid_best) <= 3.0 * ceiling / K + 1e-9);
  }
}

TEST_CASE("waterfilling hand values") {
  SUBCASE("symmetric") {
    const std::vector<double> interference{1.0, 1.0};
    const Allocation a = br_waterfill(interference, 2.0);
    CHECK(a.powers[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.powers[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("boundary channel gets exactly zero") {
    const std::vector<double> interference{1.0, 3.0};
    const Allocation a = br_waterfill(interference, 2.0);
    CHECK(a.powers[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(a.powers[1] == 0.0);
    CHECK(1.0 / a.multiplier == doctest::Approx(3.0).epsilon(1e-14));
  }
}

TEST_CASE("waterfilling satisfies KKT and is grid-optimal") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> interference = random_interference(rng, 10);
    const double budget = uniform(rng, 0.5, 5.0);
    const Allocation a = br_waterfill(interference, budget);
    CHECK(total(a.powers) == doctest::Approx(budget).epsilon(1e-10));
    CHECK(kkt_residual_waterfill(interference, budget, a) < 1e-10);
    const double level = 1.0 / a.multiplier;
    for (int l = 0; l < 10; ++l) {
      if (a.powers[l] > 0.0)
        CHECK(interference[l] + a.powers[l] == doctest::Approx(level).epsilon(1e-10));
      else
        CHECK(interference[l] >= level * (1.0 - 1e-12));
    }
  }
  for (int trial = 0; trial < 3; ++trial) {
    const std::vector<double> interference = random_interference(rng, 3, 0.2, 2.0);
    const double budget = uniform(rng, 0.5, 3.0);
    const Allocation a = br_waterfill(interference, budget);
    const int K = 84;  // C(87,3) ~ 1e5 lattice points
    const double grid_best = oracles::grid_max_under_budget(
        3, K, budget, [&](std::span<const double> p) { return rate_objective(interference, p); });
    CHECK(grid_best <= a.objective * (1.0 + 1e-9));
    double slack = 0.0;
    for (double v : interference) slack += (budget / K) / v;
    CHECK(a.objective - grid_best <= slack);
  }
}

TEST_CASE("both water-level routes agree") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const int count = 2 + static_cast<int>(rng() % 24);
    const std::vector<double> interference = random_interference(rng, count);
    const double budget = uniform(rng, 0.2, 6.0);
    CHECK(detail::water_level_sorted(interference, budget) ==
          doctest::Approx(detail::water_level_bisect(interference, budget)).epsilon(1e-9));
    const double target = uniform(rng, 0.3, 4.0);
    CHECK(detail::rate_level_sorted(interference, target) ==
          doctest::Approx(detail::rate_level_bisect(interference, target)).epsilon(1e-9));
  }
}

TEST_CASE("priced best response hand values and limits") {
  SUBCASE("zero price reproduces waterfilling bit for bit") {
    std::mt19937_64 rng(41);
    const std::vector<double> interference = random_interference(rng, 8);
    const Allocation priced = br_priced(interference, 2.5, 0.0);
    const Allocation plain = br_waterfill(interference, 2.5);
    CHECK(priced.powers == plain.powers);
    CHECK(priced.multiplier == plain.multiplier);
  }
  SUBCASE("interior optimum leaves the budget slack") {
    const std::vector<double> interference{0.5};
    const Allocation a = br_priced(interference, 2.0, 1.0);
    CHECK(a.powers[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(a.multiplier == doctest::Approx(0.0));
  }
}

TEST_CASE("priced best response satisfies complementarity and beats the grid") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> interference = random_interference(rng, 8, 0.05, 1.0);
    const double budget = uniform(rng, 0.3, 2.0);
    const double price = uniform(rng, 0.1, 6.0);
    const Allocation a = br_priced(interference, budget, price);
    const double used = total(a.powers);
    if (a.multiplier > 0.0)
      CHECK(used == doctest::Approx(budget).epsilon(1e-10));
    else
      CHECK(used <= budget * (1.0 + 1e-12));
    CHECK(kkt_residual_priced(interference, budget, price, a) < 1e-10);
  }
  for (int trial = 0; trial < 3; ++trial) {
    const std::vector<double> interference = random_interference(rng, 3, 0.2, 1.0);
    const double budget = uniform(rng, 0.5, 2.0);
    const double price = uniform(rng, 0.2, 2.0);
    const Allocation a = br_priced(interference, budget, price);
    const int K = 84;
    const double grid_best =
        oracles::grid_max_under_budget(3, K, budget, [&](std::span<const double> p) {
          double cost = 0.0;
          for (int l = 0; l < 3; ++l) cost += price * interference[l] * p[l];
          return rate_objective(interference, p) - cost;
        });
    CHECK(grid_best <= a.objective + 1e-9);
    double slack = 0.0;
    for (double v : interference) slack += (budget / K) / v;
    CHECK(a.objective - grid_best <= slack);
  }
}

TEST_CASE("fixed-priced best response") {
  std::mt19937_64 rng(47);
  SUBCASE("zero prices reproduce waterfilling") {
    const std::vector<double> interference = random_interference(rng, 6);
    const std::vector<double> zero(6, 0.0);
    const Allocation fixed = br_fixed_priced(interference, 1.5, zero);
    const Allocation plain = br_waterfill(interference, 1.5);
    CHECK(fixed.powers == plain.powers);
  }
  SUBCASE("prices frozen at current interference reproduce the priced output exactly") {
    const std::vector<double> interference = random_interference(rng, 7, 0.05, 0.8);
    const double budget = 1.2, price = 2.5;
    std::vector<double> frozen(7);
    for (int l = 0; l < 7; ++l) frozen[l] = price * interference[l];
    const Allocation a = br_priced(interference, budget, price);
    const Allocation b = br_fixed_priced(interference, budget, frozen);
    CHECK(a.powers == b.powers);
    CHECK(a.multiplier == b.multiplier);
  }
  SUBCASE("random instance against the grid") {
    const std::vector<double> interference = random_interference(rng, 3, 0.2, 1.0);
    std::vector<double> prices(3);
    for (double& c : prices) c = uniform(rng, 0.0, 2.0);
    const double budget = 1.0;
    const Allocation a = br_fixed_priced(interference, budget, prices);
    CHECK(kkt_residual_fixed_priced(interference, budget, prices, a) < 1e-10);
    const int K = 84;
    const double grid_best =
        oracles::grid_max_under_budget(3, K, budget, [&](std::span<const double> p) {
          double cost = 0.0;
          for (int l = 0; l < 3; ++l) cost += prices[l] * p[l];
          return rate_objective(interference, p) - cost;
        });
    CHECK(grid_best <= a.objective + 1e-9);
    double slack = 0.0;
    for (double v : interference) slack += (budget / K) / v;
    CHECK(a.objective - grid_best <= slack);
  }
}

TEST_CASE("random feasible perturbations never beat a solver") {
  std::mt19937_64 rng(53);
  const std::vector<double> interference = random_interference(rng, 5, 0.1, 1.5);

  SUBCASE("opportunistic") {
    const double varsigma = 1.3;
    const Allocation a = br_opportunistic(interference, varsigma);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> p = a.powers;
      for (double& v : p) v = std::max(v + uniform(rng, -1e-3, 1e-3) * (1.0 + v), 0.0);
      double used = 0.0;
      for (int l = 0; l < 5; ++l) used += p[l] * interference[l] * p[l] * interference[l];
      if (used > varsigma) {
        const double shrink = std::sqrt(varsigma / used);
        for (double& v : p) v *= shrink;
      }
      CHECK(total(p) <= a.objective * (1.0 + 1e-12));
    }
  }
  SUBCASE("waterfilling and priced") {
    const double budget = 1.8, price = 1.1;
    const Allocation wf = br_waterfill(interference, budget);
    const Allocation pr = br_priced(interference, budget, price);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> p = wf.powers;
      for (double& v : p) v = std::max(v + uniform(rng, -1e-3, 1e-3), 0.0);
      const double used = total(p);
      if (used > budget)
        for (double& v : p) v *= budget / used;
      CHECK(rate_objective(interference, p) <= wf.objective + 1e-12);

      std::vector<double> q = pr.powers;
      for (double& v : q) v = std::max(v + uniform(rng, -1e-3, 1e-3), 0.0);
      const double used_q = total(q);
      if (used_q > budget)
        for (double& v : q) v *= budget / used_q;
      double cost = 0.0;
      for (int l = 0; l < 5; ++l) cost += price * interference[l] * q[l];
      CHECK(rate_objective(interference, q) - cost <= pr.objective + 1e-12);
    }
  }
  SUBCASE("power minimization") {
    const double target = 1.1;
    const Allocation a = br_power_min(interference, target);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> p = a.powers;
      for (double& v : p) v = std::max(v + uniform(rng, -1e-3, 1e-3), 0.0);
      // Rescale up to feasibility if the perturbation undershot the target.
      double lo = 1.0, hi = 1.0;
      auto rate_at = [&](double s) {
        double rate = 0.0;
        for (int l = 0; l < 5; ++l) rate += std::log1p(s * p[l] / interference[l]);
        return rate;
      };
      while (rate_at(hi) < target) hi *= 2.0;
      if (rate_at(lo) < target) {
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          (rate_at(mid) < target ? lo : hi) = mid;
        }
        for (double& v : p) v *= hi;
      }
      CHECK(total(p) >= a.objective * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("tiny components snap to exact zero") {
  // One channel sits just at the water line; its residual fill is below the
  // snapping floor relative to the dominant component.
  const std::vector<double> interference{1.0, 3.0 - 1e-18};
  const Allocation a = br_waterfill(interference, 2.0);
  CHECK(a.powers[1] == 0.0);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(br_waterfill(std::vector<double>{}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(br_waterfill(std::vector<double>{0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(br_waterfill(std::vector<double>{1.0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(br_opportunistic(std::vector<double>{1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(br_priced(std::vector<double>{1.0}, 1.0, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(br_fixed_priced(std::vector<double>{1.0}, 1.0, std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}

}  // TEST_SUITE
