#ifndef TSCHED_RESCHEDULER_HPP
#define TSCHED_RESCHEDULER_HPP

#include <optional>
#include <string>
#include <vector>

#include "tsched/request.hpp"
#include "tsched/scheduler.hpp"
#include "tsched/types.hpp"

namespace tsched {

/// What a cascade is trying to make room for: a request at a concrete
/// bandwidth on a concrete path. Reservations and overrun extensions demand
/// their exact window; transfers replay their constraint policy.
struct TriggerIntent {
  RequestSpec spec;
  const Path* path = nullptr;
  Kbps bandwidth = 0;
  bool exact_window = false;  // reservations and extensions
  TimeMs window_start = 0;
  TimeMs window_duration = 0;
  /// Reservation id the trigger's placement is held under on success.
  std::string hold_id;
};

/// The three-step rescheduling cascade plus the dynamic handlers for early
/// finishes and overruns. Owns no state: every call works on the scheduler
/// it is handed, appending to that scheduler's cascade log.
class Rescheduler {
 public:
  /// Runs step 1 (shrink running), step 2 (shrink scheduled) and step 3
  /// (move scheduled) in order, each scoped to the trigger's own user first
  /// and then to all users. On success the winning placement is returned
  /// with its capacity held under intent.hold_id, and victims stay modified
  /// exactly as the cascade left them. On failure every action is reversed:
  /// the scheduler state is deeply equal to the state at entry.
  static std::optional<Placement> try_reschedule(Scheduler& scheduler, const TriggerIntent& intent);

  /// Truncates the request's reservations at actual_finish, freeing the
  /// remainder of its window, and marks it FINISHED.
  static void handle_early_finish(Scheduler& scheduler, const std::string& request_id,
                                  TimeMs actual_finish);

  /// Called at a transfer's due instant while it is still RUNNING: inserts a
  /// top-priority bandwidth reservation covering the estimated remaining
  /// time, displacing lower-priority work through the cascade if needed.
  static void handle_overrun(Scheduler& scheduler, const std::string& request_id, TimeMs now);
};

}  // namespace tsched

#endif
