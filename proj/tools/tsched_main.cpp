#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tsched/report.hpp"
#include "tsched/scenario.hpp"

namespace {

int load_scenario(const std::string& path, tsched::Scenario* scenario, bool quiet) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open '" << path << "'\n";
    return 1;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  tsched::ParseResult parsed = tsched::parse_scenario(buffer.str());
  std::vector<tsched::ValidationIssue> issues = parsed.issues;
  auto semantic = tsched::validate(parsed.scenario);
  issues.insert(issues.end(), semantic.begin(), semantic.end());
  if (!issues.empty()) {
    for (const auto& issue : issues) std::cerr << issue.path << ": " << issue.message << '\n';
    return 1;
  }
  if (!quiet)
    std::cout << "valid: " << parsed.scenario.nodes.size() << " nodes, "
              << parsed.scenario.links.size() << " links, " << parsed.scenario.requests.size()
              << " requests" << (parsed.scenario.fuzz ? " (fuzz)" : "") << '\n';
  *scenario = std::move(parsed.scenario);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid file-transfer scheduling simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("file", scenario_path, "scenario file")->required();

  std::string run_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  std::int64_t floor = -1;
  std::int64_t max_paths = -1;
  bool human = false;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario");
  run_cmd->add_option("file", run_path, "scenario file")->required();
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seed", seed, "override the fuzz seed");
  run_cmd->add_option("--floor", floor, "bandwidth floor in kbps");
  run_cmd->add_option("--max-paths", max_paths, "candidate paths per request");
  run_cmd->add_flag("--human", human, "print request times as clock values");

  CLI11_PARSE(app, argc, argv);

  if (validate_cmd->parsed()) {
    tsched::Scenario scenario;
    return load_scenario(scenario_path, &scenario, false);
  }

  tsched::Scenario scenario;
  if (int status = load_scenario(run_path, &scenario, true); status != 0) return status;
  if (seed >= 0) {
    if (!scenario.fuzz) {
      std::cerr << "--seed applies to fuzz scenarios only\n";
      return 1;
    }
    scenario.fuzz->seed = static_cast<std::uint64_t>(seed);
  }
  if (floor > 0) scenario.settings.bandwidth_floor = floor;
  if (max_paths > 0) scenario.settings.max_paths = static_cast<std::size_t>(max_paths);

  tsched::RunOptions options;
  options.output_dir = out_dir;
  options.human_times = human;
  return tsched::run_scenario(scenario, options, std::cout);
}
