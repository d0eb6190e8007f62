#ifndef TSCHED_SCENARIO_HPP
#define TSCHED_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsched/request.hpp"
#include "tsched/scheduler.hpp"
#include "tsched/topology.hpp"

namespace tsched {

struct ScenarioNode {
  std::string name;
  int line = 0;
};

struct ScenarioLink {
  std::string id;
  std::string source;
  std::string dest;
  Kbps capacity = 0;
  int line = 0;
};

/// Parameters of a generated random scenario; `fuzz` lines stand in for
/// explicit topology/request sections.
struct FuzzSpec {
  std::uint64_t seed = 1;
  int nodes = 5;
  int links = 8;
  int requests = 20;
  TimeMs horizon = 200000;
  std::vector<Ratio> factors = {{1, 1}};
};

struct Scenario {
  std::vector<ScenarioNode> nodes;
  std::vector<ScenarioLink> links;
  std::vector<RequestSpec> requests;
  Settings settings;
  std::optional<FuzzSpec> fuzz;
};

struct ValidationIssue {
  std::string path;  // e.g. "request[alex-238].bandwidth" or "line 7"
  std::string message;
};

struct ParseResult {
  Scenario scenario;
  std::vector<ValidationIssue> issues;  // syntax-level problems
};

/// Parses the line-oriented scenario format (see FORMAT.md). Unparseable
/// lines surface as issues; well-formed records still land in the scenario.
ParseResult parse_scenario(const std::string& text);

/// Semantic validation: every violation is reported with a path to the
/// offending field. An empty result means the scenario can run.
std::vector<ValidationIssue> validate(const Scenario& scenario);

/// Renders a scenario back into the line format; validate(emit(s)) accepts
/// exactly the scenarios validate(s) accepts.
std::string emit_scenario(const Scenario& scenario);

/// Materializes a fuzz scenario into concrete nodes, links and requests.
/// Deterministic per seed. Scenarios without a fuzz section pass through.
Scenario materialize(const Scenario& scenario);

Scenario generate_fuzz(const FuzzSpec& spec);

/// Builds the topology object a scenario describes.
Topology build_topology(const Scenario& scenario);

Ratio parse_factor(const std::string& text);  // "0.75" -> {3,4}
std::string format_factor(const Ratio& ratio);

}  // namespace tsched

#endif
