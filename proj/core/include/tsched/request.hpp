#ifndef TSCHED_REQUEST_HPP
#define TSCHED_REQUEST_HPP

#include <optional>
#include <string>
#include <vector>

#include "tsched/profile.hpp"
#include "tsched/topology.hpp"
#include "tsched/types.hpp"

namespace tsched {

enum class RequestKind { kTransfer, kReservation };

enum class ConstraintKind { kNone, kAsap, kNotAfter, kNotBefore };

/// Placement policy attached to a request: NONE places last-fit, ASAP places
/// first-fit, NOT_AFTER(t) requires start <= t, NOT_BEFORE(t) start >= t.
struct TimeConstraint {
  ConstraintKind kind = ConstraintKind::kAsap;
  TimeMs bound = 0;  // meaningful for kNotAfter / kNotBefore only

  static TimeConstraint none() { return {ConstraintKind::kNone, 0}; }
  static TimeConstraint asap() { return {ConstraintKind::kAsap, 0}; }
  static TimeConstraint not_after(TimeMs t) { return {ConstraintKind::kNotAfter, t}; }
  static TimeConstraint not_before(TimeMs t) { return {ConstraintKind::kNotBefore, t}; }

  friend bool operator==(const TimeConstraint&, const TimeConstraint&) = default;
};

enum class RequestStatus { kOffered, kScheduled, kStarting, kRunning, kFinished, kError };

const char* to_string(RequestKind kind);
const char* to_string(ConstraintKind kind);
const char* to_string(RequestStatus status);
std::string to_string(const TimeConstraint& constraint);

/// True when moving from `from` to `to` is a legal lifecycle step.
bool status_transition_allowed(RequestStatus from, RequestStatus to);

struct BandwidthChange {
  TimeMs time = 0;
  Kbps bandwidth = 0;

  friend bool operator==(const BandwidthChange&, const BandwidthChange&) = default;
};

/// Exact transfer progress bookkeeping. `accumulated` is in
/// kilobits * 1000 * factor.den units so integer arithmetic carries
/// sub-kilobit remainders without drift.
struct TransferProgress {
  std::int64_t accumulated = 0;
  TimeMs last_update = 0;

  friend bool operator==(const TransferProgress&, const TransferProgress&) = default;
};

struct Monitoring {
  Kbps used_bandwidth = 0;
  std::string finish_status;

  friend bool operator==(const Monitoring&, const Monitoring&) = default;
};

/// What a user hands to the scheduler. Transfers carry a size and optionally
/// a bandwidth; reservations always carry bandwidth, start and duration.
struct RequestSpec {
  std::string id;
  std::string user;
  RequestKind kind = RequestKind::kTransfer;
  std::string source;
  std::string dest;
  Kilobits size = 0;
  std::optional<Kbps> bandwidth;
  Priority priority = 0;
  TimeConstraint constraint;
  TimeMs start = 0;     // reservations
  TimeMs duration = 0;  // reservations
  Ratio throughput_factor{1, 1};

  // Simulation-level fields, ignored by the scheduler itself.
  TimeMs submit_time = 0;
  enum class AcceptPolicy { kFirst, kIndex, kNone } accept_policy = AcceptPolicy::kFirst;
  int accept_index = 0;
};

/// A request owned by the scheduler, from acceptance to completion.
struct Request {
  std::string id;
  std::string user;
  RequestKind kind = RequestKind::kTransfer;
  std::string source;
  std::string dest;
  Kilobits size = 0;
  std::optional<Kbps> user_bandwidth;
  Kbps allocated_bandwidth = 0;
  Priority priority = 0;
  TimeConstraint constraint;
  Path path;
  TimeMs start = 0;
  TimeMs duration = 0;
  RequestStatus status = RequestStatus::kOffered;
  int bw_modification_count = 0;
  int reschedule_count = 0;
  Monitoring monitoring;

  Ratio throughput_factor{1, 1};
  TransferProgress progress;
  /// End of the contiguous reserved coverage: own window or, once overrun
  /// extensions exist, the latest extension's end.
  TimeMs cover_until = 0;
  /// False for a reservation placed away from its requested window.
  bool conforming = true;
  /// Non-empty on overrun extensions: the transfer being extended.
  std::string extension_of;
  int extensions_spawned = 0;
  TimeMs finished_at = -1;

  std::vector<BandwidthChange> bandwidth_history;
  /// Current segments reserved on every link of the path (uniform along it).
  std::vector<ReservationSegment> allocation;

  TimeMs end() const { return start + duration; }
  bool auto_bandwidth() const { return !user_bandwidth.has_value(); }
  bool satisfies_constraint() const;
};

struct Placement {
  TimeMs start = 0;
  TimeMs duration = 0;
  Kbps bandwidth = 0;

  TimeMs end() const { return start + duration; }
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// A tentative placement holding its capacity until accepted or discarded.
struct Offer {
  std::string id;
  Request request;  // status kOffered, placement fields filled in
  int path_rank = 0;
  bool conforming = true;
  TimeMs created_at = 0;
};

/// Transfer duration for a bandwidth, rounded up so reservations never
/// undershoot the real transfer time.
inline TimeMs transfer_duration(Kilobits size, Kbps bandwidth) {
  return ceil_div(size * 1000, bandwidth);
}

}  // namespace tsched

#endif
