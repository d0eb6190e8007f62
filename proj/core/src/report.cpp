#include "tsched/report.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "tsched/error.hpp"

namespace tsched {

namespace {

nlohmann::json profile_json(const std::string& id, const char* kind,
                            const BandwidthProfile& profile) {
  nlohmann::json intervals = nlohmann::json::array();
  for (const Interval& iv : profile.intervals()) {
    nlohmann::json row;
    row["begin"] = iv.begin;
    if (iv.end == kTimeInfinity) {
      row["end"] = "inf";
    } else {
      row["end"] = iv.end;
    }
    row["available_kbps"] = iv.available;
    row["requests"] = iv.requests;
    intervals.push_back(std::move(row));
  }
  return nlohmann::json{{"id", id},
                        {"kind", kind},
                        {"capacity_kbps", profile.base_capacity()},
                        {"intervals", std::move(intervals)}};
}

}  // namespace

void write_snapshot(std::ostream& os, const SimEvent& event, const Scheduler& scheduler) {
  nlohmann::json record;
  record["t"] = event.time;
  record["event"] = to_string(event.kind);
  record["payload"] = event.payload;
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& [id, profile] : scheduler.link_profiles()) {
    profiles.push_back(profile_json(id, "link", profile));
  }
  for (const auto& [id, profile] : scheduler.annotated_path_profiles()) {
    profiles.push_back(profile_json(id, "path", profile));
  }
  record["profiles"] = std::move(profiles);
  os << record.dump() << '\n';
}

void write_schedule_csv(std::ostream& os, const RunReport& report) {
  os << "request_id,user,priority,path,start,end,bandwidth_kbps,status,constraint,"
        "bw_modifications,reschedules,outcome\n";
  std::map<std::string, std::string> outcomes;
  for (const auto& submission : report.submissions)
    outcomes[submission.request_id] = submission.outcome;

  for (const auto& submission : report.submissions) {
    auto it = report.requests.find(submission.request_id);
    if (it == report.requests.end()) {
      // Declined or rejected before entering the scheduler.
      os << submission.request_id << ",,,,,,,,,,," << submission.outcome << '\n';
      continue;
    }
    const Request& r = it->second;
    const TimeMs end = r.finished_at >= 0 ? r.finished_at : r.end();
    os << r.id << ',' << r.user << ',' << r.priority << ',' << r.path.id() << ',' << r.start
       << ',' << end << ',' << r.allocated_bandwidth << ',' << to_string(r.status) << ','
       << to_string(r.constraint) << ',' << r.bw_modification_count << ',' << r.reschedule_count
       << ',' << submission.outcome << '\n';
  }
  for (const auto& [id, r] : report.requests) {
    if (r.extension_of.empty()) continue;
    const TimeMs end = r.finished_at >= 0 ? r.finished_at : r.end();
    os << r.id << ',' << r.user << ',' << r.priority << ',' << r.path.id() << ',' << r.start
       << ',' << end << ',' << r.allocated_bandwidth << ',' << to_string(r.status) << ','
       << to_string(r.constraint) << ',' << r.bw_modification_count << ',' << r.reschedule_count
       << ",extension:" << r.extension_of << '\n';
  }
}

void write_utilization_csv(std::ostream& os, const RunReport& report) {
  os << "link_id,begin,end,reserved_kbps\n";
  for (const auto& [link_id, profile] : report.link_profiles) {
    for (const Interval& iv : profile.normalized().intervals()) {
      os << link_id << ',' << iv.begin << ',' << format_time_ms(iv.end) << ','
         << profile.base_capacity() - iv.available << '\n';
    }
  }
}

void write_cascade_log(std::ostream& os, const RunReport& report) {
  for (const CascadeRecord& record : report.cascades) {
    os << "cascade trigger=" << record.trigger_id << " priority=" << record.trigger_priority
       << " needed=" << record.needed_bandwidth << " path=" << record.path_id
       << " outcome=" << (record.success ? "success" : "failure");
    if (record.success) os << " step=" << record.final_step << " scope=" << record.final_scope;
    os << '\n';
    for (const auto& action : record.actions) {
      os << "  victim=" << action.request_id << " priority=" << action.priority
         << " action=" << action.action << " bw=" << action.bw_before << "->" << action.bw_after
         << " start=" << action.start_before << "->" << action.start_after << '\n';
    }
  }
}

int run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(options.output_dir);
  std::ofstream snapshots(fs::path(options.output_dir) / "snapshots.jsonl");

  Simulation simulation(scenario);
  simulation.set_snapshot_sink([&snapshots](const SimEvent& event, const Scheduler& scheduler) {
    write_snapshot(snapshots, event, scheduler);
  });

  RunReport report;
  try {
    report = simulation.run();
  } catch (const Error& e) {
    log << "runtime invariant violation: " << e.what() << '\n';
    return 2;
  }

  {
    std::ofstream schedule(fs::path(options.output_dir) / "schedule.csv");
    write_schedule_csv(schedule, report);
    std::ofstream utilization(fs::path(options.output_dir) / "utilization.csv");
    write_utilization_csv(utilization, report);
    std::ofstream cascades(fs::path(options.output_dir) / "cascade.log");
    write_cascade_log(cascades, report);
  }

  // Post-run machine checks over what was just written.
  for (const auto& [link_id, profile] : report.link_profiles) {
    for (const Interval& iv : profile.intervals()) {
      if (iv.available < 0 || iv.available > profile.base_capacity()) {
        log << "utilization exceeds capacity on " << link_id << " at t=" << iv.begin << '\n';
        return 2;
      }
    }
  }
  for (const auto& [id, request] : report.requests) {
    if (request.status == RequestStatus::kError) continue;
    if (!request.satisfies_constraint()) {
      log << "request " << id << " violates its time constraint\n";
      return 2;
    }
    if (request.user_bandwidth) {
      for (const BandwidthChange& change : request.bandwidth_history) {
        if (change.bandwidth != *request.user_bandwidth && change.bandwidth != 0) {
          log << "request " << id << " had its user bandwidth modified\n";
          return 2;
        }
      }
    }
  }

  int finished = 0;
  for (const auto& [id, request] : report.requests) {
    if (request.status == RequestStatus::kFinished) ++finished;
  }
  log << "events=" << report.event_trace.size() << " requests=" << report.requests.size()
      << " finished=" << finished << " cascades=" << report.cascades.size() << '\n';
  if (options.human_times && !report.requests.empty()) {
    for (const auto& [id, request] : report.requests) {
      log << "  " << id << " " << to_string(request.status) << " start="
          << format_clock(request.start) << " end="
          << format_clock(request.finished_at >= 0 ? request.finished_at : request.end()) << '\n';
    }
  }
  return 0;
}

}  // namespace tsched
