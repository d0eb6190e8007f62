#include "tsched/rescheduler.hpp"

#include <algorithm>
#include <cassert>
#include <optional>
#include <set>

#include "tsched/error.hpp"
#include "tsched/sim.hpp"

namespace tsched {

namespace {

bool paths_share_links(const Path& a, const Path& b) {
  for (const Link& la : a.links) {
    for (const Link& lb : b.links) {
      if (la.id == lb.id) return true;
    }
  }
  return false;
}

Kbps victim_floor(const Scheduler& sched, const Request& victim) {
  return std::max(sched.settings().bandwidth_floor, victim.path.bottleneck() / 64);
}

std::optional<Placement> query_trigger(const Scheduler& sched, const TriggerIntent& intent) {
  if (intent.exact_window) {
    if (sched.fits_at(*intent.path, intent.window_start, intent.window_duration, intent.bandwidth))
      return Placement{intent.window_start, intent.window_duration, intent.bandwidth};
    return std::nullopt;
  }
  return sched.plan_fixed(intent.spec, *intent.path, intent.bandwidth);
}

enum class PassOutcome { kContinue, kSuccess, kAbort };

}  // namespace

/// Cascade machinery with access to the scheduler's request and profile
/// tables. All state lives in the per-cascade context; a failed cascade
/// restores the before-images it collected.
class CascadeOps {
 public:
  struct Ctx {
    Scheduler& sched;
    const TriggerIntent& intent;
    CascadeRecord record;
    std::vector<Request> images;  // first-touch copies
    std::set<std::string> captured;
    std::vector<std::string> removed_step2;  // removal order
    std::vector<std::string> removed_step3;
    bool trigger_held = false;
  };

  static Request& request_ref(Scheduler& sched, const std::string& id) {
    return sched.requests_.at(id);
  }

  static void capture(Ctx& ctx, const std::string& id) {
    if (ctx.captured.insert(id).second) ctx.images.push_back(request_ref(ctx.sched, id));
  }

  static bool holds_capacity(const Scheduler& sched, const Request& request) {
    return !request.path.links.empty() &&
           sched.link_profile(request.path.links.front()->id).has_reservation(request.id);
  }

  static void reserve_segments(Scheduler& sched, const std::string& id, const Path& path,
                               const std::vector<ReservationSegment>& segments) {
    for (const Link& link : path.links) {
      for (const ReservationSegment& seg : segments) {
        sched.link_profiles_.at(link.id).reserve(seg.begin, seg.end, seg.bandwidth, id);
      }
    }
  }

  static void release_all(Scheduler& sched, const std::string& id, const Path& path) {
    for (const Link& link : path.links) {
      auto& profile = sched.link_profiles_.at(link.id);
      if (profile.has_reservation(id)) profile.release(id);
    }
  }

  static void note_action(Ctx& ctx, const Request& victim, const std::string& action,
                          Kbps bw_before, Kbps bw_after, TimeMs start_before, TimeMs start_after) {
    ctx.record.actions.push_back(CascadeRecord::VictimAction{
        victim.id, victim.priority, action, bw_before, bw_after, start_before, start_after});
  }

  static void hold_trigger(Ctx& ctx, const Placement& placement) {
    ctx.sched.hold(hold_id(ctx), *ctx.intent.path, placement.start, placement.duration,
                   placement.bandwidth);
    ctx.trigger_held = true;
  }

  static std::string hold_id(const Ctx& ctx) {
    return ctx.intent.hold_id.empty() ? ctx.intent.spec.id : ctx.intent.hold_id;
  }

  /// Candidates for one step in that step's victim order.
  static std::vector<std::string> eligible_victims(Ctx& ctx, int step, bool own_scope,
                                                   const std::set<std::string>& excluded) {
    std::vector<const Request*> picks;
    for (const auto& [id, request] : ctx.sched.requests_) {
      if (excluded.count(id)) continue;
      if (request.priority >= ctx.intent.spec.priority) continue;
      if (own_scope && request.user != ctx.intent.spec.user) continue;
      if (!paths_share_links(request.path, *ctx.intent.path)) continue;
      if (step == 1) {
        if (request.status != RequestStatus::kRunning && request.status != RequestStatus::kStarting)
          continue;
        if (!request.auto_bandwidth()) continue;
      } else if (step == 2) {
        if (request.status != RequestStatus::kScheduled) continue;
        if (!request.auto_bandwidth()) continue;
        if (request.allocation.empty()) continue;  // already pulled out
      } else {
        if (request.status != RequestStatus::kScheduled) continue;
        if (request.constraint.kind != ConstraintKind::kNone &&
            request.constraint.kind != ConstraintKind::kNotBefore)
          continue;
        if (request.allocation.empty()) continue;
      }
      picks.push_back(&request);
    }
    std::sort(picks.begin(), picks.end(), [step](const Request* a, const Request* b) {
      if (a->priority != b->priority) return a->priority < b->priority;
      if (step == 3) {
        if (a->reschedule_count != b->reschedule_count)
          return a->reschedule_count < b->reschedule_count;
        if (a->allocated_bandwidth != b->allocated_bandwidth)
          return a->allocated_bandwidth > b->allocated_bandwidth;
      } else {
        if (a->bw_modification_count != b->bw_modification_count)
          return a->bw_modification_count < b->bw_modification_count;
        // Ascending for running victims, descending for the scheduled pool.
        if (a->allocated_bandwidth != b->allocated_bandwidth)
          return step == 1 ? a->allocated_bandwidth < b->allocated_bandwidth
                           : a->allocated_bandwidth > b->allocated_bandwidth;
      }
      return a->id < b->id;
    });
    std::vector<std::string> ids;
    ids.reserve(picks.size());
    for (const Request* r : picks) ids.push_back(r->id);
    return ids;
  }

  /// Lowers a running victim's bandwidth from now on. The window extends to
  /// the recomputed end when the capacity behind it allows; otherwise the
  /// old window is kept and the overrun machinery claims the rest at the
  /// due instant.
  static void reduce_running(Ctx& ctx, const std::string& victim_id, Kbps new_bw) {
    Scheduler& sched = ctx.sched;
    const TimeMs now = sched.now();
    capture(ctx, victim_id);
    Request& victim = request_ref(sched, victim_id);
    const Kbps old_bw = victim.allocated_bandwidth;

    update_progress(victim, now);
    const Kilobits remaining = remaining_kilobits(victim);

    release_all(sched, victim_id, victim.path);
    std::vector<ReservationSegment> past;
    TimeMs old_end = now;
    for (const ReservationSegment& seg : victim.allocation) {
      old_end = std::max(old_end, seg.end);
      if (seg.begin >= now) continue;
      past.push_back(ReservationSegment{seg.begin, std::min(seg.end, now), seg.bandwidth});
    }
    const TimeMs new_end = remaining > 0 ? now + ceil_div(remaining * 1000, new_bw) : old_end;
    std::vector<ReservationSegment> segments = past;
    if (new_end > now) segments.push_back(ReservationSegment{now, new_end, new_bw});
    try {
      reserve_segments(sched, victim_id, victim.path, segments);
    } catch (const Error&) {
      release_all(sched, victim_id, victim.path);
      segments = past;
      if (old_end > now) segments.push_back(ReservationSegment{now, old_end, new_bw});
      reserve_segments(sched, victim_id, victim.path, segments);
    }

    victim.allocation = std::move(segments);
    victim.allocated_bandwidth = new_bw;
    victim.bw_modification_count += 1;
    TimeMs end = now;
    for (const ReservationSegment& seg : victim.allocation) end = std::max(end, seg.end);
    victim.duration = end - victim.start;
    victim.cover_until = end;
    victim.bandwidth_history.push_back({now, new_bw});
    victim.monitoring.used_bandwidth =
        new_bw * victim.throughput_factor.num / victim.throughput_factor.den;
    note_action(ctx, victim, "reduced", old_bw, new_bw, victim.start, victim.start);
    sched.notify(victim);
  }

  /// One pass over the running victims in sorted order, one reduction each,
  /// retrying the trigger after every change.
  static bool step1_pass(Ctx& ctx, bool own_scope) {
    std::set<std::string> visited;
    while (true) {
      std::vector<std::string> order = eligible_victims(ctx, 1, own_scope, visited);
      std::optional<std::string> pick;
      Kbps target = 0;
      for (const std::string& id : order) {
        const Request& candidate = request_ref(ctx.sched, id);
        visited.insert(id);
        const Kbps floor = victim_floor(ctx.sched, candidate);
        if (candidate.allocated_bandwidth <= floor) continue;
        Kbps reduced =
            std::max(floor, std::min(ctx.intent.bandwidth, candidate.allocated_bandwidth / 2));
        if (reduced >= candidate.allocated_bandwidth) continue;
        bool has_future = false;
        for (const ReservationSegment& seg : candidate.allocation) {
          if (seg.end > ctx.sched.now()) has_future = true;
        }
        if (!has_future) continue;  // nothing left to give back
        pick = id;
        target = reduced;
        break;
      }
      if (!pick) return false;
      reduce_running(ctx, *pick, target);
      if (query_trigger(ctx.sched, ctx.intent)) return true;
    }
  }

  static void remove_scheduled(Ctx& ctx, const std::string& victim_id) {
    capture(ctx, victim_id);
    Request& victim = request_ref(ctx.sched, victim_id);
    release_all(ctx.sched, victim_id, victim.path);
    note_action(ctx, victim, "removed", victim.allocated_bandwidth, victim.allocated_bandwidth,
                victim.start, victim.start);
    victim.allocation.clear();
  }

  /// Reinsertion half of step 2: repeated min(needed, half) reductions until
  /// the victim fits back at its original start, never below its floor.
  static bool reinsert_reduced(Ctx& ctx, const std::string& victim_id) {
    Scheduler& sched = ctx.sched;
    Request& victim = request_ref(sched, victim_id);
    const Kbps floor = victim_floor(sched, victim);
    const Kbps original = victim.allocated_bandwidth;
    Kbps bw = original;
    while (true) {
      Kbps reduced = std::min(ctx.intent.bandwidth, bw / 2);
      if (reduced < floor || reduced >= bw) return false;
      bw = reduced;
      const TimeMs duration = transfer_duration(victim.size, bw);
      if (!sched.fits_at(victim.path, victim.start, duration, bw)) continue;
      victim.allocation = {ReservationSegment{victim.start, victim.start + duration, bw}};
      reserve_segments(sched, victim_id, victim.path, victim.allocation);
      victim.allocated_bandwidth = bw;
      victim.duration = duration;
      victim.cover_until = victim.start + duration;
      victim.bw_modification_count += 1;
      victim.bandwidth_history.push_back({sched.now(), bw});
      note_action(ctx, victim, "reinserted", original, bw, victim.start, victim.start);
      sched.notify(victim);
      return true;
    }
  }

  static bool reinsert_unmodified_or_reduced(Ctx& ctx, const std::string& victim_id) {
    Scheduler& sched = ctx.sched;
    Request& victim = request_ref(sched, victim_id);
    if (sched.fits_at(victim.path, victim.start, victim.duration, victim.allocated_bandwidth)) {
      victim.allocation = {ReservationSegment{victim.start, victim.start + victim.duration,
                                              victim.allocated_bandwidth}};
      reserve_segments(sched, victim_id, victim.path, victim.allocation);
      note_action(ctx, victim, "reinserted", victim.allocated_bandwidth,
                  victim.allocated_bandwidth, victim.start, victim.start);
      sched.notify(victim);
      return true;
    }
    return reinsert_reduced(ctx, victim_id);
  }

  /// Two-ended greedy over everything step 2 pulled out: the front of the
  /// sorted pool is reduced outright, the back goes in unmodified when it
  /// still fits. A middle element of an odd pool counts as a front item.
  static bool greedy_reinsert(Ctx& ctx) {
    std::vector<std::string> pool = ctx.removed_step2;
    std::sort(pool.begin(), pool.end(), [&](const std::string& ia, const std::string& ib) {
      const Request& a = request_ref(ctx.sched, ia);
      const Request& b = request_ref(ctx.sched, ib);
      if (a.priority != b.priority) return a.priority < b.priority;
      if (a.bw_modification_count != b.bw_modification_count)
        return a.bw_modification_count < b.bw_modification_count;
      if (a.allocated_bandwidth != b.allocated_bandwidth)
        return a.allocated_bandwidth > b.allocated_bandwidth;
      return a.id < b.id;
    });
    std::size_t front = 0;
    std::size_t back = pool.size();
    bool front_turn = true;
    while (front < back) {
      bool ok = front_turn ? reinsert_reduced(ctx, pool[front++])
                           : reinsert_unmodified_or_reduced(ctx, pool[--back]);
      if (!ok) return false;
      front_turn = !front_turn;
    }
    ctx.removed_step2.clear();
    return true;
  }

  static PassOutcome step2_pass(Ctx& ctx, bool own_scope, Placement* placement) {
    std::vector<std::string> eligible = eligible_victims(ctx, 2, own_scope, {});
    if (eligible.empty()) return PassOutcome::kContinue;
    for (const std::string& id : eligible) {
      remove_scheduled(ctx, id);
      ctx.removed_step2.push_back(id);
    }
    auto fit = query_trigger(ctx.sched, ctx.intent);
    if (!fit) return PassOutcome::kContinue;  // leave them out for step 3
    hold_trigger(ctx, *fit);
    if (!greedy_reinsert(ctx)) return PassOutcome::kAbort;
    *placement = *fit;
    return PassOutcome::kSuccess;
  }

  /// Re-places a step-3 victim by its own constraint policy; NONE and
  /// NOT_BEFORE placements always land somewhere, last fit falls back to
  /// the tail.
  static void reinsert_moved(Ctx& ctx, const std::string& victim_id) {
    Scheduler& sched = ctx.sched;
    Request& victim = request_ref(sched, victim_id);
    RequestSpec spec;
    spec.id = victim.id;
    spec.user = victim.user;
    spec.kind = victim.kind;
    spec.source = victim.source;
    spec.dest = victim.dest;
    spec.size = victim.size;
    spec.bandwidth = victim.user_bandwidth;
    spec.priority = victim.priority;
    spec.constraint = victim.constraint;
    spec.duration = victim.duration;
    auto placement = sched.plan_fixed(spec, victim.path, victim.allocated_bandwidth);
    assert(placement.has_value());
    const TimeMs old_start = victim.start;
    victim.allocation = {
        ReservationSegment{placement->start, placement->end(), victim.allocated_bandwidth}};
    reserve_segments(sched, victim_id, victim.path, victim.allocation);
    victim.start = placement->start;
    victim.duration = placement->duration;
    victim.cover_until = placement->end();
    if (victim.start != old_start) {
      // A moved request re-enters as a fresh entry with the new parameters;
      // it keeps its id and counts the move.
      victim.reschedule_count += 1;
      note_action(ctx, victim, "moved", victim.allocated_bandwidth, victim.allocated_bandwidth,
                  old_start, victim.start);
    } else {
      note_action(ctx, victim, "reinserted", victim.allocated_bandwidth,
                  victim.allocated_bandwidth, old_start, victim.start);
    }
    sched.notify(victim);
  }

  static PassOutcome step3_pass(Ctx& ctx, bool own_scope, Placement* placement) {
    std::set<std::string> excluded;
    while (true) {
      std::vector<std::string> order = eligible_victims(ctx, 3, own_scope, excluded);
      if (order.empty()) return PassOutcome::kContinue;
      const std::string victim_id = order.front();
      excluded.insert(victim_id);
      remove_scheduled(ctx, victim_id);
      ctx.removed_step3.push_back(victim_id);
      auto fit = query_trigger(ctx.sched, ctx.intent);
      if (!fit) continue;
      hold_trigger(ctx, *fit);
      if (!greedy_reinsert(ctx)) return PassOutcome::kAbort;
      for (const std::string& id : ctx.removed_step3) reinsert_moved(ctx, id);
      ctx.removed_step3.clear();
      *placement = *fit;
      return PassOutcome::kSuccess;
    }
  }

  /// Two-phase reversal: drop everything the cascade touched, then restore
  /// the before-images wholesale. Releasing first guarantees every original
  /// reservation fits back.
  static void rollback(Ctx& ctx) {
    Scheduler& sched = ctx.sched;
    if (ctx.trigger_held) {
      sched.release_hold(hold_id(ctx), *ctx.intent.path);
      ctx.trigger_held = false;
    }
    for (const Request& image : ctx.images) {
      Request& current = request_ref(sched, image.id);
      release_all(sched, image.id, current.path);
    }
    for (const Request& image : ctx.images) {
      Request& current = request_ref(sched, image.id);
      current = image;
      if (!image.allocation.empty()) reserve_segments(sched, image.id, image.path, image.allocation);
      note_action(ctx, current, "restored", current.allocated_bandwidth,
                  current.allocated_bandwidth, current.start, current.start);
      sched.notify(current);
    }
  }
};

std::optional<Placement> Rescheduler::try_reschedule(Scheduler& scheduler,
                                                     const TriggerIntent& intent) {
  assert(intent.path != nullptr);
  CascadeOps::Ctx ctx{scheduler, intent};
  ctx.record.trigger_id = intent.spec.id;
  ctx.record.trigger_priority = intent.spec.priority;
  ctx.record.needed_bandwidth = intent.bandwidth;
  ctx.record.path_id = intent.path->id();

  Placement placement{};
  for (int step = 1; step <= 3; ++step) {
    for (bool own_scope : {true, false}) {
      PassOutcome outcome = PassOutcome::kContinue;
      if (step == 1) {
        if (CascadeOps::step1_pass(ctx, own_scope)) {
          auto fit = query_trigger(scheduler, intent);
          assert(fit);
          CascadeOps::hold_trigger(ctx, *fit);
          placement = *fit;
          outcome = PassOutcome::kSuccess;
        }
      } else if (step == 2) {
        outcome = CascadeOps::step2_pass(ctx, own_scope, &placement);
      } else {
        outcome = CascadeOps::step3_pass(ctx, own_scope, &placement);
      }
      if (outcome == PassOutcome::kSuccess) {
        ctx.record.success = true;
        ctx.record.final_step = step;
        ctx.record.final_scope = own_scope ? "own" : "all";
        scheduler.cascade_log_.push_back(ctx.record);
        return placement;
      }
      if (outcome == PassOutcome::kAbort) {
        CascadeOps::rollback(ctx);
        scheduler.cascade_log_.push_back(ctx.record);
        return std::nullopt;
      }
    }
  }
  CascadeOps::rollback(ctx);
  scheduler.cascade_log_.push_back(ctx.record);
  return std::nullopt;
}

void Rescheduler::handle_early_finish(Scheduler& scheduler, const std::string& request_id,
                                      TimeMs actual_finish) {
  Request& request = CascadeOps::request_ref(scheduler, request_id);
  if (request.status != RequestStatus::kRunning)
    throw Error(ErrorCode::kPreconditionViolated, "only running requests finish");
  update_progress(request, actual_finish);

  auto truncate_request = [&](Request& target) {
    for (const Link& link : target.path.links) {
      auto& profile = scheduler.link_profiles_.at(link.id);
      if (profile.has_reservation(target.id)) profile.truncate(target.id, actual_finish);
    }
    std::vector<ReservationSegment> kept;
    for (const ReservationSegment& seg : target.allocation) {
      if (seg.begin >= actual_finish) continue;
      kept.push_back(
          ReservationSegment{seg.begin, std::min(seg.end, actual_finish), seg.bandwidth});
    }
    target.allocation = std::move(kept);
  };

  truncate_request(request);
  request.status = RequestStatus::kFinished;
  request.finished_at = actual_finish;
  request.monitoring.used_bandwidth = 0;
  request.monitoring.finish_status =
      request.extensions_spawned > 0 ? "completed_late" : "completed";
  scheduler.notify(request);

  // Any live overrun extension for this transfer ends with it.
  for (auto& [id, other] : scheduler.requests_) {
    if (other.extension_of != request_id || other.status != RequestStatus::kRunning) continue;
    truncate_request(other);
    other.status = RequestStatus::kFinished;
    other.finished_at = actual_finish;
    other.monitoring.finish_status = "completed";
    scheduler.notify(other);
  }
}

void Rescheduler::handle_overrun(Scheduler& scheduler, const std::string& request_id, TimeMs now) {
  Request& request = CascadeOps::request_ref(scheduler, request_id);
  if (request.status != RequestStatus::kRunning) return;
  update_progress(request, now);
  if (remaining_kilobits(request) <= 0) {
    handle_early_finish(scheduler, request_id, now);
    return;
  }

  const Ratio f = request.throughput_factor;
  const std::int64_t remaining_scaled = request.size * 1000 * f.den - request.progress.accumulated;
  Kbps desired = request.allocated_bandwidth;
  if (desired <= 0) {
    for (auto it = request.bandwidth_history.rbegin(); it != request.bandwidth_history.rend();
         ++it) {
      if (it->bandwidth > 0) {
        desired = it->bandwidth;
        break;
      }
    }
    if (desired <= 0) desired = request.path.bottleneck();
  }

  auto extension_duration = [&](Kbps bw) {
    return std::max<TimeMs>(scheduler.settings().min_extension_ms,
                            ceil_div(remaining_scaled, bw * f.num));
  };

  const std::string ext_id = request.id + ".ext" + std::to_string(request.extensions_spawned + 1);
  Kbps bw = desired;
  TimeMs ext_dur = extension_duration(bw);
  bool held = false;

  if (scheduler.fits_at(request.path, now, ext_dur, bw)) {
    scheduler.hold(ext_id, request.path, now, ext_dur, bw);
    held = true;
  } else {
    TriggerIntent intent;
    intent.spec.id = ext_id;
    intent.spec.user = request.user;
    intent.spec.kind = RequestKind::kReservation;
    intent.spec.source = request.source;
    intent.spec.dest = request.dest;
    intent.spec.bandwidth = bw;
    intent.spec.priority = kMaxPriority;
    intent.spec.constraint = TimeConstraint::not_after(now);
    intent.spec.start = now;
    intent.spec.duration = ext_dur;
    intent.path = &request.path;
    intent.bandwidth = bw;
    intent.exact_window = true;
    intent.window_start = now;
    intent.window_duration = ext_dur;
    intent.hold_id = ext_id;
    if (try_reschedule(scheduler, intent)) held = true;
  }

  if (!held) {
    // Claim what the path can still carry; the transfer's allocation follows
    // so the capacity books stay exact.
    BandwidthProfile profile = scheduler.path_profile(request.path);
    while (bw > 0) {
      Kbps available = profile.min_available(now, now + ext_dur);
      if (available >= bw) break;
      bw = available;
      if (bw <= 0) break;
      ext_dur = extension_duration(bw);
    }
    if (bw > 0) {
      scheduler.hold(ext_id, request.path, now, ext_dur, bw);
      held = true;
    }
  }

  if (!held) {
    // Fully blocked: stall and probe again after the minimum extension.
    if (request.allocated_bandwidth != 0) {
      request.allocated_bandwidth = 0;
      request.bandwidth_history.push_back({now, 0});
      request.monitoring.used_bandwidth = 0;
    }
    request.cover_until = now + scheduler.settings().min_extension_ms;
    scheduler.notify(request);
    return;
  }

  if (bw != request.allocated_bandwidth) {
    request.allocated_bandwidth = bw;
    request.bandwidth_history.push_back({now, bw});
    request.monitoring.used_bandwidth = bw * f.num / f.den;
  }

  Request extension;
  extension.id = ext_id;
  extension.user = request.user;
  extension.kind = RequestKind::kReservation;
  extension.source = request.source;
  extension.dest = request.dest;
  extension.user_bandwidth = bw;
  extension.allocated_bandwidth = bw;
  extension.priority = kMaxPriority;
  extension.constraint = TimeConstraint::not_after(now);
  extension.path = request.path;
  extension.start = now;
  extension.duration = ext_dur;
  extension.status = RequestStatus::kRunning;
  extension.cover_until = now + ext_dur;
  extension.extension_of = request.id;
  extension.bandwidth_history.push_back({now, bw});
  extension.allocation = {ReservationSegment{now, now + ext_dur, bw}};
  extension.progress.last_update = now;
  scheduler.requests_.emplace(ext_id, extension);
  scheduler.note_path_use(request.path, 1);

  request.extensions_spawned += 1;
  request.cover_until = now + ext_dur;
  scheduler.notify(request);
  scheduler.notify(scheduler.requests_.at(ext_id));
}

}  // namespace tsched
