#ifndef TSCHED_SIM_HPP
#define TSCHED_SIM_HPP

#include <functional>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "tsched/scenario.hpp"
#include "tsched/scheduler.hpp"

namespace tsched {

/// A virtual-time event. At equal instants FINISH fires before DUE before
/// START before SUBMIT before ACCEPT, so a transfer completing exactly at
/// its due instant never looks like an overrun; remaining ties break on the
/// payload id.
struct SimEvent {
  enum class Kind { kFinish = 0, kDue = 1, kStart = 2, kSubmit = 3, kAccept = 4 };

  TimeMs time = 0;
  Kind kind = Kind::kSubmit;
  std::string payload;  // request or offer id

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

const char* to_string(SimEvent::Kind kind);

// Exact progress arithmetic. Progress accumulates in
// kilobits * 1000 * factor.den units so piecewise bandwidth changes carry
// their remainders instead of rounding them away.

/// Advances a RUNNING transfer's byte count to `now`. Must run before any
/// bandwidth change so accounting stays piecewise-exact.
void update_progress(Request& request, TimeMs now);

Kilobits bytes_moved(const Request& request);
Kilobits remaining_kilobits(const Request& request);

/// When the request would complete at its current allocation and throughput
/// factor; reservations complete at their window end. kTimeInfinity while
/// the effective rate is zero.
TimeMs projected_finish(const Request& request);

struct RunReport {
  struct SubmissionOutcome {
    std::string request_id;
    std::string outcome;  // accepted | declined | rejected:<code>
  };

  std::vector<SimEvent> event_trace;
  std::map<std::string, Request> requests;  // final states, extensions included
  std::vector<SubmissionOutcome> submissions;
  std::vector<CascadeRecord> cascades;
  std::map<std::string, BandwidthProfile> link_profiles;
  std::vector<std::pair<std::string, Kbps>> link_capacities;
};

using SnapshotSink = std::function<void(const SimEvent&, const Scheduler&)>;

/// Single-threaded discrete-event driver: fires submissions, acceptances,
/// transfer starts, due-time checks and completions over a scheduler built
/// from the scenario.
class Simulation : public PlacementListener {
 public:
  explicit Simulation(const Scenario& scenario);

  void set_snapshot_sink(SnapshotSink sink) { snapshot_sink_ = std::move(sink); }

  /// Processes the event queue to quiescence and reports every request's
  /// final state. Throws ScenarioInvalid for unrunnable scenarios and
  /// InvariantViolated if a capacity invariant breaks mid-run.
  RunReport run();

  void on_request_updated(const Request& request) override;

  const Scheduler& scheduler() const { return scheduler_; }

 private:
  struct EventOrder {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return a.kind > b.kind;
      return a.payload > b.payload;
    }
  };

  bool dispatch(const SimEvent& event);
  void check_link_invariants() const;

  Scenario scenario_;
  Topology topology_;
  Scheduler scheduler_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventOrder> queue_;
  std::map<std::string, const RequestSpec*> specs_;
  std::vector<RunReport::SubmissionOutcome> submissions_;
  std::vector<SimEvent> trace_;
  SnapshotSink snapshot_sink_;
};

}  // namespace tsched

#endif
