#include "tsched/sim.hpp"

#include <cassert>

#include "tsched/error.hpp"
#include "tsched/rescheduler.hpp"

namespace tsched {

const char* to_string(SimEvent::Kind kind) {
  switch (kind) {
    case SimEvent::Kind::kFinish: return "finish";
    case SimEvent::Kind::kDue: return "due";
    case SimEvent::Kind::kStart: return "start";
    case SimEvent::Kind::kSubmit: return "submit";
    case SimEvent::Kind::kAccept: return "accept";
  }
  return "?";
}

void update_progress(Request& request, TimeMs now) {
  if (request.status != RequestStatus::kRunning) return;
  if (now < request.progress.last_update)
    throw Error(ErrorCode::kPreconditionViolated, "progress cannot run backwards");
  if (request.kind != RequestKind::kTransfer) {
    request.progress.last_update = now;
    return;
  }
  const Ratio f = request.throughput_factor;
  const std::int64_t target = request.size * 1000 * f.den;
  request.progress.accumulated +=
      (now - request.progress.last_update) * request.allocated_bandwidth * f.num;
  if (request.progress.accumulated > target) request.progress.accumulated = target;
  request.progress.last_update = now;
}

Kilobits bytes_moved(const Request& request) {
  if (request.kind != RequestKind::kTransfer) return 0;
  const Ratio f = request.throughput_factor;
  return request.progress.accumulated / (1000 * f.den);
}

Kilobits remaining_kilobits(const Request& request) {
  if (request.kind != RequestKind::kTransfer) return 0;
  return request.size - bytes_moved(request);
}

TimeMs projected_finish(const Request& request) {
  if (request.kind != RequestKind::kTransfer) return request.end();
  const Ratio f = request.throughput_factor;
  const std::int64_t target = request.size * 1000 * f.den;
  const std::int64_t needed = target - request.progress.accumulated;
  if (needed <= 0) return request.progress.last_update;
  const std::int64_t rate = request.allocated_bandwidth * f.num;
  if (rate <= 0) return kTimeInfinity;
  return request.progress.last_update + ceil_div(needed, rate);
}

namespace {

Topology checked_topology(const Scenario& scenario) {
  auto issues = validate(scenario);
  if (!issues.empty())
    throw Error(ErrorCode::kScenarioInvalid,
                issues.front().path + ": " + issues.front().message);
  return build_topology(scenario);
}

}  // namespace

Simulation::Simulation(const Scenario& scenario)
    : scenario_(materialize(scenario)),
      topology_(checked_topology(scenario_)),
      scheduler_(topology_, scenario_.settings) {
  scheduler_.set_listener(this);
  for (const RequestSpec& spec : scenario_.requests) specs_[spec.id] = &spec;
}

void Simulation::on_request_updated(const Request& request) {
  switch (request.status) {
    case RequestStatus::kScheduled:
      queue_.push(SimEvent{request.start, SimEvent::Kind::kStart, request.id});
      queue_.push(SimEvent{request.cover_until, SimEvent::Kind::kDue, request.id});
      break;
    case RequestStatus::kRunning: {
      queue_.push(SimEvent{request.cover_until, SimEvent::Kind::kDue, request.id});
      TimeMs finish = projected_finish(request);
      if (finish != kTimeInfinity)
        queue_.push(SimEvent{finish, SimEvent::Kind::kFinish, request.id});
      break;
    }
    default:
      break;
  }
}

bool Simulation::dispatch(const SimEvent& event) {
  switch (event.kind) {
    case SimEvent::Kind::kSubmit: {
      const RequestSpec& spec = *specs_.at(event.payload);
      std::vector<Offer> offers;
      try {
        offers = scheduler_.submit(spec);
      } catch (const Error& e) {
        submissions_.push_back({spec.id, std::string("rejected:") + error_code_name(e.code())});
        return true;
      }
      int accept_index = -1;
      if (spec.accept_policy == RequestSpec::AcceptPolicy::kFirst) {
        accept_index = 0;
      } else if (spec.accept_policy == RequestSpec::AcceptPolicy::kIndex &&
                 spec.accept_index >= 0 &&
                 spec.accept_index < static_cast<int>(offers.size())) {
        accept_index = spec.accept_index;
      }
      if (accept_index < 0) {
        submissions_.push_back({spec.id, "declined"});
      } else {
        submissions_.push_back({spec.id, "accepted"});
        queue_.push(
            SimEvent{scheduler_.now(), SimEvent::Kind::kAccept, offers[accept_index].id});
      }
      return true;
    }
    case SimEvent::Kind::kAccept:
      scheduler_.accept(event.payload);
      return true;
    case SimEvent::Kind::kStart: {
      const Request* request = scheduler_.find_request(event.payload);
      if (!request || request->status != RequestStatus::kScheduled ||
          request->start != event.time)
        return false;  // superseded by a move
      scheduler_.start_request(event.payload, event.time);
      return true;
    }
    case SimEvent::Kind::kDue: {
      const Request* request = scheduler_.find_request(event.payload);
      if (!request || request->cover_until != event.time) return false;
      if (request->status == RequestStatus::kRunning) {
        if (request->kind == RequestKind::kTransfer) {
          Rescheduler::handle_overrun(scheduler_, event.payload, event.time);
        } else {
          Rescheduler::handle_early_finish(scheduler_, event.payload, event.time);
        }
      }
      return true;  // a due check on finished work is a no-op event
    }
    case SimEvent::Kind::kFinish: {
      const Request* request = scheduler_.find_request(event.payload);
      if (!request || request->status != RequestStatus::kRunning) return false;
      if (projected_finish(*request) != event.time) return false;  // stale after a change
      Rescheduler::handle_early_finish(scheduler_, event.payload, event.time);
      return true;
    }
  }
  return false;
}

void Simulation::check_link_invariants() const {
  for (const auto& [link_id, profile] : scheduler_.link_profiles()) {
    const auto& intervals = profile.intervals();
    if (intervals.empty() || intervals.back().end != kTimeInfinity ||
        intervals.back().available != profile.base_capacity())
      throw Error(ErrorCode::kInvariantViolated,
                  "link '" + link_id + "' lost its unbounded full-capacity tail");
    TimeMs cursor = 0;
    for (const Interval& iv : intervals) {
      if (iv.begin != cursor || iv.begin >= iv.end)
        throw Error(ErrorCode::kInvariantViolated, "link '" + link_id + "' intervals not contiguous");
      if (iv.available < 0 || iv.available > profile.base_capacity())
        throw Error(ErrorCode::kInvariantViolated,
                    "link '" + link_id + "' oversubscribed at t=" + std::to_string(iv.begin));
      cursor = iv.end;
    }
  }
}

RunReport Simulation::run() {
  for (const RequestSpec& spec : scenario_.requests) {
    queue_.push(SimEvent{spec.submit_time, SimEvent::Kind::kSubmit, spec.id});
  }

  TimeMs clock = 0;
  std::size_t processed = 0;
  constexpr std::size_t kEventBudget = 5000000;
  while (!queue_.empty()) {
    SimEvent event = queue_.top();
    queue_.pop();
    if (event.time > clock) {
      clock = event.time;
      scheduler_.set_now(clock);
      scheduler_.expire_offers();
    }
    if (!dispatch(event)) continue;
    trace_.push_back(event);
    check_link_invariants();
    if (snapshot_sink_) snapshot_sink_(event, scheduler_);
    if (++processed > kEventBudget)
      throw Error(ErrorCode::kInvariantViolated, "event budget exhausted; scenario does not settle");
  }

  RunReport report;
  report.event_trace = std::move(trace_);
  report.requests = scheduler_.requests();
  report.submissions = std::move(submissions_);
  report.cascades = scheduler_.cascade_log();
  report.link_profiles = scheduler_.link_profiles();
  for (const Link& link : topology_.links()) report.link_capacities.emplace_back(link.id, link.capacity);
  return report;
}

}  // namespace tsched
