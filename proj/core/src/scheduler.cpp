#include "tsched/scheduler.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "tsched/error.hpp"
#include "tsched/rescheduler.hpp"

namespace tsched {

Scheduler::Scheduler(const Topology& topology, Settings settings)
    : topology_(&topology), settings_(settings) {
  for (const Link& link : topology.links()) {
    link_profiles_.emplace(link.id, BandwidthProfile(link.capacity, BandwidthProfile::Kind::kLink));
  }
}

void Scheduler::set_now(TimeMs now) {
  if (now < now_)
    throw Error(ErrorCode::kPreconditionViolated, "virtual time cannot move backwards");
  now_ = now;
}

const BandwidthProfile& Scheduler::link_profile(const std::string& link_id) const {
  auto it = link_profiles_.find(link_id);
  if (it == link_profiles_.end()) throw Error(ErrorCode::kUnknownLink, "link '" + link_id + "'");
  return it->second;
}

BandwidthProfile Scheduler::path_profile(const Path& path) const {
  std::vector<const BandwidthProfile*> members;
  members.reserve(path.links.size());
  for (const Link& link : path.links) members.push_back(&link_profile(link.id));
  return path_availability(members);
}

Kbps Scheduler::auto_bandwidth_floor(Kbps bottleneck) const {
  return std::max(settings_.bandwidth_floor, bottleneck / 64);
}

bool Scheduler::fits_at(const Path& path, TimeMs start, TimeMs duration, Kbps bandwidth) const {
  if (start < 0 || duration <= 0) return false;
  BandwidthProfile profile = path_profile(path);
  if (bandwidth > profile.base_capacity()) return false;
  return profile.min_available(start, start + duration) >= bandwidth;
}

std::optional<Placement> Scheduler::plan_fixed(const RequestSpec& spec, const Path& path,
                                               Kbps bandwidth) const {
  if (bandwidth <= 0)
    throw Error(ErrorCode::kPreconditionViolated, "placement bandwidth must be positive");
  BandwidthProfile profile = path_profile(path);
  if (bandwidth > profile.base_capacity()) return std::nullopt;
  const TimeMs duration = spec.kind == RequestKind::kTransfer
                              ? transfer_duration(spec.size, bandwidth)
                              : spec.duration;

  switch (spec.constraint.kind) {
    case ConstraintKind::kAsap: {
      auto start = profile.first_fit(now_, duration, bandwidth);
      if (!start) return std::nullopt;
      return Placement{*start, duration, bandwidth};
    }
    case ConstraintKind::kNotAfter: {
      const TimeMs bound = spec.constraint.bound;
      if (bound >= now_ && profile.min_available(bound, bound + duration) >= bandwidth)
        return Placement{bound, duration, bandwidth};
      auto start = profile.first_fit(now_, duration, bandwidth);
      if (start && *start <= bound) return Placement{*start, duration, bandwidth};
      return std::nullopt;
    }
    case ConstraintKind::kNotBefore: {
      const TimeMs bound = std::max(spec.constraint.bound, now_);
      if (profile.min_available(bound, bound + duration) >= bandwidth)
        return Placement{bound, duration, bandwidth};
      return Placement{profile.last_fit(duration, bandwidth, bound), duration, bandwidth};
    }
    case ConstraintKind::kNone:
      return Placement{profile.last_fit(duration, bandwidth, now_), duration, bandwidth};
  }
  return std::nullopt;
}

AutoBandwidthSearch Scheduler::plan_auto(const RequestSpec& spec, const Path& path) const {
  if (spec.bandwidth.has_value() || spec.kind != RequestKind::kTransfer)
    throw Error(ErrorCode::kPreconditionViolated,
                "auto-bandwidth search applies to transfers without a user bandwidth");
  AutoBandwidthSearch search;
  const Kbps bottleneck = path.bottleneck();
  const Kbps floor = auto_bandwidth_floor(bottleneck);
  for (Kbps bw = bottleneck; bw >= floor && bw > 0; bw /= 2) {
    AutoBandwidthTrial trial;
    trial.bandwidth = bw;
    if (auto placement = plan_fixed(spec, path, bw)) {
      trial.feasible = true;
      trial.start = placement->start;
      trial.end = placement->end();
    }
    search.trials.push_back(trial);
    if (trial.feasible &&
        (!search.best || trial.end < search.trials[*search.best].end)) {
      search.best = search.trials.size() - 1;
    }
  }
  return search;
}

Request Scheduler::materialize(const RequestSpec& spec, const Path& path,
                               const Placement& placement, bool conforming) const {
  Request request;
  request.id = spec.id;
  request.user = spec.user;
  request.kind = spec.kind;
  request.source = spec.source;
  request.dest = spec.dest;
  request.size = spec.size;
  request.user_bandwidth = spec.bandwidth;
  request.allocated_bandwidth = placement.bandwidth;
  request.priority = spec.priority;
  request.constraint = spec.constraint;
  request.path = path;
  request.start = placement.start;
  request.duration = placement.duration;
  request.status = RequestStatus::kOffered;
  request.throughput_factor = spec.throughput_factor;
  request.cover_until = placement.end();
  request.conforming = conforming;
  // An accepted off-window reservation is a new agreement: its bound moves
  // to the start the user actually accepted.
  if (!conforming) request.constraint = TimeConstraint::not_after(placement.start);
  request.allocation = {ReservationSegment{placement.start, placement.end(), placement.bandwidth}};
  return request;
}

void Scheduler::hold(const std::string& reservation_id, const Path& path, TimeMs start,
                     TimeMs duration, Kbps bandwidth) {
  std::size_t done = 0;
  try {
    for (; done < path.links.size(); ++done) {
      link_profiles_.at(path.links[done]->id)
          .reserve(start, start + duration, bandwidth, reservation_id);
    }
  } catch (...) {
    for (std::size_t i = 0; i < done; ++i) {
      link_profiles_.at(path.links[i]->id).release(reservation_id);
    }
    throw;
  }
}

void Scheduler::release_hold(const std::string& reservation_id, const Path& path) {
  for (const Link& link : path.links) link_profiles_.at(link.id).release(reservation_id);
}

void Scheduler::note_path_use(const Path& path, int delta) {
  PathUse& use = paths_in_use_[path.id()];
  if (use.refcount == 0 && delta > 0) use.path = path;
  use.refcount += delta;
  if (use.refcount <= 0) paths_in_use_.erase(path.id());
}

void Scheduler::notify(const Request& request) {
  if (listener_) listener_->on_request_updated(request);
}

std::optional<Placement> Scheduler::place_with_cascade(const RequestSpec& spec, const Path& path,
                                                       const std::string& hold_id,
                                                       bool* conforming) {
  *conforming = true;
  if (spec.kind == RequestKind::kReservation) {
    const Kbps bandwidth = *spec.bandwidth;
    if (bandwidth > path.bottleneck()) return std::nullopt;
    if (fits_at(path, spec.start, spec.duration, bandwidth)) {
      return Placement{spec.start, spec.duration, bandwidth};
    }
    TriggerIntent intent;
    intent.spec = spec;
    intent.path = &path;
    intent.bandwidth = bandwidth;
    intent.exact_window = true;
    intent.window_start = spec.start;
    intent.window_duration = spec.duration;
    intent.hold_id = hold_id;
    if (auto placement = Rescheduler::try_reschedule(*this, intent)) return placement;
    // Alternative to the stated constraints: earliest window that carries
    // the bandwidth, offered as a non-conforming placement.
    BandwidthProfile profile = path_profile(path);
    auto start = profile.first_fit(now_, spec.duration, bandwidth);
    assert(start);
    *conforming = false;
    return Placement{*start, spec.duration, bandwidth};
  }

  if (spec.bandwidth) {
    if (auto placement = plan_fixed(spec, path, *spec.bandwidth)) return placement;
    TriggerIntent intent;
    intent.spec = spec;
    intent.path = &path;
    intent.bandwidth = *spec.bandwidth;
    intent.hold_id = hold_id;
    return Rescheduler::try_reschedule(*this, intent);
  }

  AutoBandwidthSearch search = plan_auto(spec, path);
  if (search.best) {
    const AutoBandwidthTrial& trial = search.trials[*search.best];
    return Placement{trial.start, trial.end - trial.start, trial.bandwidth};
  }
  // No candidate bandwidth fits as-is; try to make room, preferring the
  // largest bandwidth the cascade can clear.
  for (const AutoBandwidthTrial& trial : search.trials) {
    TriggerIntent intent;
    intent.spec = spec;
    intent.path = &path;
    intent.bandwidth = trial.bandwidth;
    intent.hold_id = hold_id;
    if (auto placement = Rescheduler::try_reschedule(*this, intent)) return placement;
  }
  return std::nullopt;
}

std::vector<Offer> Scheduler::submit(const RequestSpec& spec) {
  if (spec.source == spec.dest)
    throw Error(ErrorCode::kPreconditionViolated, "request source and dest must differ");
  if (spec.id.empty())
    throw Error(ErrorCode::kPreconditionViolated, "request id must be non-empty");
  if (requests_.count(spec.id))
    throw Error(ErrorCode::kPreconditionViolated, "request id '" + spec.id + "' already in use");
  if (spec.kind == RequestKind::kReservation) {
    if (!spec.bandwidth || spec.duration <= 0)
      throw Error(ErrorCode::kPreconditionViolated,
                  "reservations need bandwidth, start and duration");
    if (spec.start < now_)
      throw Error(ErrorCode::kPreconditionViolated, "reservation start lies in the past");
  } else if (spec.size <= 0) {
    throw Error(ErrorCode::kPreconditionViolated, "transfer size must be positive");
  }

  std::vector<Path> paths = topology_->enumerate_paths(spec.source, spec.dest, settings_.max_paths);
  if (paths.empty())
    throw Error(ErrorCode::kNoPath, "no path from '" + spec.source + "' to '" + spec.dest + "'");

  std::vector<Offer> produced;
  for (std::size_t rank = 0; rank < paths.size(); ++rank) {
    const Path& path = paths[rank];
    const std::string offer_id = spec.id + "/" + std::to_string(rank);
    bool conforming = true;
    auto placement = place_with_cascade(spec, path, offer_id, &conforming);
    if (!placement) continue;
    Offer offer;
    offer.id = offer_id;
    offer.request = materialize(spec, path, *placement, conforming);
    offer.path_rank = static_cast<int>(rank);
    offer.conforming = conforming;
    offer.created_at = now_;
    // A cascade holds the winning placement itself (under the offer id it
    // was handed); plain placements are held here.
    bool held = false;
    for (const Link& link : path.links) {
      if (link_profile(link.id).has_reservation(offer.id)) held = true;
    }
    if (!held) hold(offer.id, path, placement->start, placement->duration, placement->bandwidth);
    note_path_use(path, 1);
    offers_.emplace(offer.id, offer);
    produced.push_back(offer);
  }

  if (produced.empty())
    throw Error(ErrorCode::kCannotSchedule,
                "request '" + spec.id + "' fits on no candidate path");

  std::sort(produced.begin(), produced.end(), [](const Offer& a, const Offer& b) {
    if (a.request.end() != b.request.end()) return a.request.end() < b.request.end();
    if (a.request.allocated_bandwidth != b.request.allocated_bandwidth)
      return a.request.allocated_bandwidth > b.request.allocated_bandwidth;
    return a.path_rank < b.path_rank;
  });
  return produced;
}

const Request& Scheduler::accept(const std::string& offer_id) {
  auto it = offers_.find(offer_id);
  if (it == offers_.end())
    throw Error(ErrorCode::kUnknownOffer, "offer '" + offer_id + "'");
  Offer offer = it->second;
  if (now_ > offer.created_at + settings_.offer_expiry_ms) {
    discard_offer(offer);
    offers_.erase(offer_id);
    throw Error(ErrorCode::kExpiredOffer, "offer '" + offer_id + "'");
  }

  Request request = offer.request;
  assert(status_transition_allowed(request.status, RequestStatus::kScheduled));
  request.status = RequestStatus::kScheduled;
  request.bandwidth_history.push_back({now_, request.allocated_bandwidth});

  // Re-key the held capacity from the offer to the request itself.
  for (const Link& link : request.path.links) {
    auto segments = link_profiles_.at(link.id).release(offer_id);
    for (const ReservationSegment& seg : segments)
      link_profiles_.at(link.id).reserve(seg.begin, seg.end, seg.bandwidth, request.id);
  }
  offers_.erase(offer_id);

  // Sibling offers lapse with the user's choice.
  std::vector<std::string> siblings;
  for (const auto& [id, other] : offers_) {
    if (other.request.id == request.id) siblings.push_back(id);
  }
  for (const std::string& id : siblings) {
    discard_offer(offers_.at(id));
    offers_.erase(id);
  }

  auto [pos, inserted] = requests_.emplace(request.id, std::move(request));
  assert(inserted);
  notify(pos->second);
  return pos->second;
}

void Scheduler::discard_offer(const Offer& offer) {
  release_hold(offer.id, offer.request.path);
  note_path_use(offer.request.path, -1);
}

void Scheduler::expire_offers() {
  std::vector<std::string> expired;
  for (const auto& [id, offer] : offers_) {
    if (now_ > offer.created_at + settings_.offer_expiry_ms) expired.push_back(id);
  }
  for (const std::string& id : expired) {
    discard_offer(offers_.at(id));
    offers_.erase(id);
  }
}

void Scheduler::start_request(const std::string& id, TimeMs now) {
  auto it = requests_.find(id);
  if (it == requests_.end()) throw Error(ErrorCode::kUnknownRequest, "request '" + id + "'");
  Request& request = it->second;
  assert(status_transition_allowed(request.status, RequestStatus::kStarting));
  request.status = RequestStatus::kStarting;
  assert(status_transition_allowed(request.status, RequestStatus::kRunning));
  request.status = RequestStatus::kRunning;
  request.progress.last_update = now;
  request.monitoring.used_bandwidth =
      request.allocated_bandwidth * request.throughput_factor.num / request.throughput_factor.den;
  notify(request);
}

const Request* Scheduler::find_request(const std::string& id) const {
  auto it = requests_.find(id);
  return it == requests_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, BandwidthProfile>> Scheduler::annotated_path_profiles() const {
  std::vector<std::pair<std::string, BandwidthProfile>> out;
  for (const auto& [path_id, use] : paths_in_use_) {
    BandwidthProfile profile = path_profile(use.path);
    auto attach = [&](const Request& request) {
      if (request.path.id() != path_id) return;
      for (const ReservationSegment& seg : request.allocation) {
        if (seg.begin < seg.end) profile.reserve(seg.begin, seg.end, 0, request.id);
      }
    };
    for (const auto& [id, request] : requests_) attach(request);
    for (const auto& [id, offer] : offers_) attach(offer.request);
    out.emplace_back(path_id, std::move(profile));
  }
  return out;
}

namespace {

void digest_request(std::ostringstream& os, const Request& r) {
  os << r.id << '|' << r.user << '|' << to_string(r.kind) << '|' << r.source << '|' << r.dest
     << '|' << r.size << '|' << (r.user_bandwidth ? *r.user_bandwidth : -1) << '|'
     << r.allocated_bandwidth << '|' << r.priority << '|' << to_string(r.constraint) << '|'
     << r.path.id() << '|' << r.start << '|' << r.duration << '|' << to_string(r.status) << '|'
     << r.bw_modification_count << '|' << r.reschedule_count << '|' << r.cover_until << '|'
     << r.conforming << '|' << r.extension_of << '|' << r.extensions_spawned << '|'
     << r.finished_at << '|' << r.progress.accumulated << '@' << r.progress.last_update << '|';
  for (const auto& h : r.bandwidth_history) os << h.time << ':' << h.bandwidth << ',';
  os << '|';
  for (const auto& s : r.allocation) os << s.begin << '-' << s.end << '@' << s.bandwidth << ',';
  os << '\n';
}

}  // namespace

std::string Scheduler::state_digest() const {
  std::ostringstream os;
  os << "now=" << now_ << '\n';
  for (const auto& [id, request] : requests_) digest_request(os, request);
  for (const auto& [id, offer] : offers_) {
    os << "offer " << id << '|' << offer.path_rank << '|' << offer.conforming << '|'
       << offer.created_at << '\n';
    digest_request(os, offer.request);
  }
  for (const auto& [id, profile] : link_profiles_) {
    os << "link " << id << " cap=" << profile.base_capacity() << '\n';
    for (const Interval& iv : profile.normalized().intervals()) {
      os << "  [" << iv.begin << ',' << format_time_ms(iv.end) << ")@" << iv.available << '\n';
    }
    for (const auto& [rid, segments] : profile.reservations()) {
      os << "  res " << rid << ':';
      for (const auto& s : segments) os << s.begin << '-' << s.end << '@' << s.bandwidth << ',';
      os << '\n';
    }
  }
  for (const auto& [path_id, use] : paths_in_use_) {
    os << "path " << path_id << " x" << use.refcount << '\n';
  }
  return os.str();
}

}  // namespace tsched
