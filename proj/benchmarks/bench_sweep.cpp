// Times the serial reference sweep against the OpenMP sweep on synthetic
// networks large enough for the per-user loop to matter.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "powergames/engine.hpp"
#include "powergames/scenario.hpp"

using namespace powergames;
using clock_type = std::chrono::steady_clock;

namespace {

double time_sweeps(const Scenario& scenario, GameConfig config, SweepMode mode, int repetitions,
                   PowerProfile* out) {
  config.sweep_mode = mode;
  PowerProfile profile = PowerProfile::constant(scenario.num_users, scenario.num_subchannels,
                                                1e-3 * power_scale(scenario, config));
  const auto start = clock_type::now();
  for (int r = 0; r < repetitions; ++r) profile = sweep(scenario, config, profile);
  const std::chrono::duration<double, std::milli> elapsed = clock_type::now() - start;
  *out = profile;
  return elapsed.count();
}

void bench_game(const char* label, const Scenario& scenario, const GameConfig& config,
                int repetitions) {
  PowerProfile serial_out, parallel_out;
  const double serial_ms = time_sweeps(scenario, config, SweepMode::Serial, repetitions, &serial_out);
  const double parallel_ms =
      time_sweeps(scenario, config, SweepMode::OpenMP, repetitions, &parallel_out);
  const bool identical = serial_out == parallel_out;
  std::printf("%-24s M=%-4d L=%-4d sweeps=%-4d serial %9.2f ms  openmp %9.2f ms  speedup %5.2fx  %s\n",
              label, scenario.num_users, scenario.num_subchannels, repetitions, serial_ms,
              parallel_ms, serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp not enabled; both lanes run serially\n");
#endif

  {
    const Scenario scenario = generate_scenario(7, 64, 128);
    GameConfig config;
    config.kind = GameKind::Opportunistic;
    config.users.resize(64);
    for (auto& u : config.users) u.varsigma = 1.0;
    bench_game("opportunistic", scenario, config, 50);
  }
  {
    const Scenario scenario = generate_scenario(11, 48, 256);
    GameConfig config;
    config.kind = GameKind::PricedWaterfilling;
    config.users.resize(48);
    for (auto& u : config.users) {
      u.power_budget = 10.0;
      u.price = 100.0;
    }
    bench_game("priced_waterfilling", scenario, config, 20);
  }
  {
    const Scenario scenario = generate_scenario(13, 96, 64);
    GameConfig config;
    config.kind = GameKind::Waterfilling;
    config.users.resize(96);
    for (auto& u : config.users) u.power_budget = 5.0;
    bench_game("waterfilling", scenario, config, 50);
  }
  return 0;
}
