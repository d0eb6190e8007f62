#ifndef TSCHED_REPORT_HPP
#define TSCHED_REPORT_HPP

#include <iosfwd>
#include <string>

#include "tsched/scenario.hpp"
#include "tsched/sim.hpp"

namespace tsched {

/// One snapshot line: the event plus the full scheduler interval tables
/// (link profiles and annotated path profiles) as a JSON object.
void write_snapshot(std::ostream& os, const SimEvent& event, const Scheduler& scheduler);

void write_schedule_csv(std::ostream& os, const RunReport& report);
void write_utilization_csv(std::ostream& os, const RunReport& report);
void write_cascade_log(std::ostream& os, const RunReport& report);

struct RunOptions {
  std::string output_dir;
  bool human_times = false;
};

/// Executes a validated scenario and writes snapshots.jsonl, schedule.csv,
/// utilization.csv and cascade.log into the output directory. Returns the
/// process exit status: 0 on success, 2 when a runtime invariant broke.
int run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& log);

}  // namespace tsched

#endif
