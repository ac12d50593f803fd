#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "powergames/analysis.hpp"
#include "powergames/experiments.hpp"
#include "powergames/scenario.hpp"

namespace fs = std::filesystem;
using namespace powergames;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buffer.str();
}

void write_output(const std::string& target, const std::string& contents) {
  if (target.empty() || target == "-") {
    std::cout << contents;
    return;
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + target);
  out << contents;
  if (!out) throw IoError("write failed: " + target);
}

std::vector<double> parse_list(const std::string& text, int expected, const char* what) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) values.push_back(std::stod(item));
  if (static_cast<int>(values.size()) == 1) values.assign(expected, values.front());
  if (static_cast<int>(values.size()) != expected)
    throw std::invalid_argument(std::string(what) + ": expected 1 or " +
                                std::to_string(expected) + " comma-separated values");
  return values;
}

int cmd_run(const std::string& target, std::optional<std::uint64_t> seed,
            std::optional<int> seeds, std::optional<int> steps, std::optional<double> step_factor,
            std::optional<std::string> out_dir) {
  ExperimentSpec spec;
  if (fs::path(target).extension() == ".json")
    spec = spec_from_json(read_file(target));
  else
    spec = preset_spec(preset_from_name(target));
  if (seed) spec.base_seed = *seed;
  if (seeds) spec.num_seeds = *seeds;
  if (steps) spec.steps = *steps;
  if (step_factor) spec.step_factor = *step_factor;
  if (out_dir) spec.out_dir = *out_dir;
  run_experiment(spec);
  std::cout << "wrote " << spec.out_dir << "/manifest.json (" << spec.num_seeds << " seed"
            << (spec.num_seeds == 1 ? "" : "s") << ")\n";
  return kExitOk;
}

int cmd_analyze(const std::string& scenario_path, const std::string& varsigma,
                const std::string& budget, const std::string& price, const std::string& out) {
  const Scenario scenario = scenario_from_json(read_file(scenario_path));
  const int m = scenario.num_users;
  const AnalysisReport report =
      analyze_scenario(scenario, parse_list(varsigma, m, "--varsigma"),
                       parse_list(budget, m, "--budget"), parse_list(price, m, "--price"));
  write_output(out, report_to_json(report) + "\n");
  return kExitOk;
}

Series load_series(const std::string& target) {
  fs::path path(target);
  if (fs::is_directory(path)) path /= "results.csv";
  return series_from_csv(read_file(path));
}

int cmd_compare(const std::string& run_a, const std::string& run_b, const std::string& out) {
  const ComparisonRecord record = compare_schemes(load_series(run_a), load_series(run_b));
  write_output(out, comparison_csv(record));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Game-theoretic power control on multi-carrier interference channels"};
  app.require_subcommand(1);

  std::string run_target;
  std::optional<std::uint64_t> flag_seed;
  std::optional<int> flag_seeds, flag_steps;
  std::optional<double> flag_factor;
  std::optional<std::string> flag_out_dir;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment preset or a JSON config");
  std::string preset_help = "preset name or config.json; presets:";
  for (const std::string& name : preset_names()) preset_help += " " + name;
  run_cmd->add_option("target", run_target, preset_help)->required();
  run_cmd->add_option("--seed", flag_seed, "base seed of the ensemble");
  run_cmd->add_option("--seeds", flag_seeds, "number of ensemble members");
  run_cmd->add_option("--steps", flag_steps, "channel-scaling steps after the base run");
  run_cmd->add_option("--step-factor", flag_factor, "direct-gain factor applied per step");
  run_cmd->add_option("--out", flag_out_dir, "output directory");

  std::string analyze_scenario_path, analyze_varsigma = "1", analyze_budget = "1",
              analyze_price = "1", analyze_out;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Equilibrium uniqueness/convergence conditions for a scenario");
  analyze_cmd->add_option("scenario", analyze_scenario_path, "scenario JSON file")->required();
  analyze_cmd->add_option("--varsigma", analyze_varsigma,
                          "quadratic budgets, scalar or comma list");
  analyze_cmd->add_option("--budget", analyze_budget, "power budgets, scalar or comma list");
  analyze_cmd->add_option("--price", analyze_price, "pricing coefficients, scalar or comma list");
  analyze_cmd->add_option("--out", analyze_out, "report path (default stdout)");

  std::string compare_a, compare_b, compare_out;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Per-step percentage differences between two runs");
  compare_cmd->add_option("runA", compare_a, "series CSV or run directory")->required();
  compare_cmd->add_option("runB", compare_b, "series CSV or run directory")->required();
  compare_cmd->add_option("--out", compare_out, "comparison CSV path (default stdout)");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed())
      return cmd_run(run_target, flag_seed, flag_seeds, flag_steps, flag_factor, flag_out_dir);
    if (analyze_cmd->parsed())
      return cmd_analyze(analyze_scenario_path, analyze_varsigma, analyze_budget, analyze_price,
                         analyze_out);
    if (compare_cmd->parsed()) return cmd_compare(compare_a, compare_b, compare_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
