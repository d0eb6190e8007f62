#ifndef TSCHED_SCHEDULER_HPP
#define TSCHED_SCHEDULER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsched/profile.hpp"
#include "tsched/request.hpp"
#include "tsched/topology.hpp"
#include "tsched/types.hpp"

namespace tsched {

struct Settings {
  Kbps bandwidth_floor = 1000;
  std::size_t max_paths = 4;
  /// Unaccepted offers expire once virtual time passes created_at + this.
  TimeMs offer_expiry_ms = 0;
  TimeMs min_extension_ms = 1000;
};

/// Notified whenever a request's placement or status changes, so the
/// simulation can (re)register timer events. Stale events are detected on
/// delivery, so over-notification is harmless.
class PlacementListener {
 public:
  virtual ~PlacementListener() = default;
  virtual void on_request_updated(const Request& request) = 0;
};

struct AutoBandwidthTrial {
  Kbps bandwidth = 0;
  bool feasible = false;
  TimeMs start = 0;
  TimeMs end = 0;
};

struct AutoBandwidthSearch {
  std::vector<AutoBandwidthTrial> trials;
  std::optional<std::size_t> best;  // index into trials
};

/// One rescheduling cascade, as recorded for the cascade log and the
/// property checks.
struct CascadeRecord {
  struct VictimAction {
    std::string request_id;
    Priority priority = 0;
    std::string action;  // reduced | removed | reinserted | moved | restored
    Kbps bw_before = 0;
    Kbps bw_after = 0;
    TimeMs start_before = 0;
    TimeMs start_after = 0;
  };

  std::string trigger_id;
  Priority trigger_priority = 0;
  Kbps needed_bandwidth = 0;
  std::string path_id;
  bool success = false;
  int final_step = 0;        // 1..3 when successful
  std::string final_scope;   // "own" or "all"
  std::vector<VictimAction> actions;
};

class Rescheduler;

/// The single scheduling instance: owns every request and every link
/// profile, places new requests under the four time-constraint policies,
/// runs the auto-bandwidth search and manages the offer lifecycle. All
/// operations execute serially in submission order.
class Scheduler {
 public:
  explicit Scheduler(const Topology& topology, Settings settings = {});

  void set_listener(PlacementListener* listener) { listener_ = listener; }
  void set_now(TimeMs now);
  TimeMs now() const { return now_; }
  const Settings& settings() const { return settings_; }
  const Topology& topology() const { return *topology_; }

  /// Places the request on every candidate path. Each feasible placement
  /// becomes an offer holding its capacity; paths that resist placement go
  /// through the rescheduling cascade before being given up on. Offers come
  /// back best-first: earliest end, then highest bandwidth.
  std::vector<Offer> submit(const RequestSpec& spec);

  /// Promotes an offer into a SCHEDULED request, releases its sibling
  /// offers and re-registers the held capacity under the request id.
  const Request& accept(const std::string& offer_id);

  /// Releases every unaccepted offer whose expiry has passed.
  void expire_offers();

  // Placement queries. These never mutate profiles; submit/cascades hold
  // the capacity of whatever placement wins.

  /// Constraint-policy placement at a fixed bandwidth; nullopt means
  /// CannotSchedule (possible for NOT_AFTER, or bandwidth > bottleneck).
  std::optional<Placement> plan_fixed(const RequestSpec& spec, const Path& path, Kbps bandwidth) const;

  /// The halving search over candidate bandwidths for transfers without a
  /// user bandwidth: every step from the path bottleneck down to the floor
  /// is evaluated and the earliest end wins; ties keep the higher bandwidth.
  AutoBandwidthSearch plan_auto(const RequestSpec& spec, const Path& path) const;

  /// Exact-window check used for reservations and overrun extensions.
  bool fits_at(const Path& path, TimeMs start, TimeMs duration, Kbps bandwidth) const;

  BandwidthProfile path_profile(const Path& path) const;
  Kbps auto_bandwidth_floor(Kbps bottleneck) const;

  // Simulation-facing transitions.
  void start_request(const std::string& id, TimeMs now);

  const std::map<std::string, Request>& requests() const { return requests_; }
  const Request* find_request(const std::string& id) const;
  const std::map<std::string, Offer>& offers() const { return offers_; }
  const BandwidthProfile& link_profile(const std::string& link_id) const;
  const std::map<std::string, BandwidthProfile>& link_profiles() const { return link_profiles_; }
  const std::vector<CascadeRecord>& cascade_log() const { return cascade_log_; }

  /// Path profiles for every path in use, with the covering request ids
  /// attached per interval; what snapshot records serialize.
  std::vector<std::pair<std::string, BandwidthProfile>> annotated_path_profiles() const;

  /// Canonical rendering of the full mutable state; two schedulers with the
  /// same digest are deeply equal. Drives the atomic-rollback checks.
  std::string state_digest() const;

 private:
  friend class Rescheduler;
  friend class CascadeOps;

  struct PathUse {
    Path path;
    int refcount = 0;
  };

  void hold(const std::string& reservation_id, const Path& path, TimeMs start, TimeMs duration,
            Kbps bandwidth);
  void release_hold(const std::string& reservation_id, const Path& path);
  void discard_offer(const Offer& offer);
  void note_path_use(const Path& path, int delta);
  void notify(const Request& request);
  Request materialize(const RequestSpec& spec, const Path& path, const Placement& placement,
                      bool conforming) const;
  std::optional<Placement> place_with_cascade(const RequestSpec& spec, const Path& path,
                                              const std::string& hold_id, bool* conforming);

  const Topology* topology_;
  Settings settings_;
  TimeMs now_ = 0;
  PlacementListener* listener_ = nullptr;
  std::map<std::string, BandwidthProfile> link_profiles_;
  std::map<std::string, Request> requests_;
  std::map<std::string, Offer> offers_;
  std::map<std::string, PathUse> paths_in_use_;
  std::vector<CascadeRecord> cascade_log_;
};

}  // namespace tsched

#endif
