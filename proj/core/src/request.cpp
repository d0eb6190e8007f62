#include "tsched/request.hpp"

namespace tsched {

const char* to_string(RequestKind kind) {
  return kind == RequestKind::kTransfer ? "transfer" : "reservation";
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kNone: return "none";
    case ConstraintKind::kAsap: return "asap";
    case ConstraintKind::kNotAfter: return "not_after";
    case ConstraintKind::kNotBefore: return "not_before";
  }
  return "?";
}

const char* to_string(RequestStatus status) {
  switch (status) {
    case RequestStatus::kOffered: return "OFFERED";
    case RequestStatus::kScheduled: return "SCHEDULED";
    case RequestStatus::kStarting: return "STARTING";
    case RequestStatus::kRunning: return "RUNNING";
    case RequestStatus::kFinished: return "FINISHED";
    case RequestStatus::kError: return "ERROR";
  }
  return "?";
}

std::string to_string(const TimeConstraint& constraint) {
  std::string out = to_string(constraint.kind);
  if (constraint.kind == ConstraintKind::kNotAfter || constraint.kind == ConstraintKind::kNotBefore)
    out += ":" + std::to_string(constraint.bound);
  return out;
}

bool status_transition_allowed(RequestStatus from, RequestStatus to) {
  if (to == RequestStatus::kError) return true;
  switch (from) {
    case RequestStatus::kOffered: return to == RequestStatus::kScheduled;
    case RequestStatus::kScheduled: return to == RequestStatus::kStarting;
    case RequestStatus::kStarting: return to == RequestStatus::kRunning;
    case RequestStatus::kRunning: return to == RequestStatus::kFinished;
    default: return false;
  }
}

bool Request::satisfies_constraint() const {
  switch (constraint.kind) {
    case ConstraintKind::kNotAfter: return start <= constraint.bound;
    case ConstraintKind::kNotBefore: return start >= constraint.bound;
    default: return true;
  }
}

}  // namespace tsched
