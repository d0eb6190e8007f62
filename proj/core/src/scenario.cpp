#include "tsched/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "tsched/error.hpp"

namespace tsched {

namespace {

constexpr TimeMs kMaxTime = 1000000000;       // 10^9 ms of virtual time
constexpr Kbps kMaxBandwidth = 10000000;      // 10 Gbps
constexpr Kilobits kMaxSize = 500000000;      // keeps durations within kMaxTime

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

struct KeyValues {
  std::vector<std::pair<std::string, std::string>> pairs;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : pairs) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

bool parse_int(const std::string& text, std::int64_t* out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

class LineParser {
 public:
  LineParser(Scenario* scenario, std::vector<ValidationIssue>* issues)
      : scenario_(scenario), issues_(issues) {}

  void feed(const std::string& raw, int line_no) {
    line_no_ = line_no;
    std::string line = raw.substr(0, raw.find('#'));
    std::vector<std::string> tokens = split_ws(line);
    if (tokens.empty()) return;
    const std::string& kind = tokens.front();
    KeyValues kv;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto eq = tokens[i].find('=');
      if (eq == std::string::npos) {
        kv.pairs.emplace_back(tokens[i], "");
      } else {
        kv.pairs.emplace_back(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
      }
    }
    if (kind == "node") {
      parse_node(tokens);
    } else if (kind == "link") {
      parse_link(kv);
    } else if (kind == "set") {
      parse_setting(kv);
    } else if (kind == "request") {
      parse_request(kv);
    } else if (kind == "fuzz") {
      parse_fuzz(kv);
    } else {
      issue("unknown record type '" + kind + "'");
    }
  }

 private:
  std::string where() const { return "line " + std::to_string(line_no_); }
  void issue(const std::string& message) { issues_->push_back({where(), message}); }

  std::int64_t number(const KeyValues& kv, const std::string& key, std::int64_t fallback,
                      bool required = false) {
    const std::string* value = kv.find(key);
    if (!value) {
      if (required) issue("missing field '" + key + "'");
      return fallback;
    }
    std::int64_t out = 0;
    if (!parse_int(*value, &out)) {
      issue("field '" + key + "' is not an integer: '" + *value + "'");
      return fallback;
    }
    return out;
  }

  std::string text(const KeyValues& kv, const std::string& key, bool required = true) {
    const std::string* value = kv.find(key);
    if (!value || value->empty()) {
      if (required) issue("missing field '" + key + "'");
      return "";
    }
    return *value;
  }

  void parse_node(const std::vector<std::string>& tokens) {
    if (tokens.size() != 2 || tokens[1].find('=') != std::string::npos) {
      issue("node lines read: node <name>");
      return;
    }
    scenario_->nodes.push_back({tokens[1], line_no_});
  }

  void parse_link(const KeyValues& kv) {
    ScenarioLink link;
    link.id = text(kv, "id");
    link.source = text(kv, "source");
    link.dest = text(kv, "dest");
    link.capacity = number(kv, "capacity", 0, true);
    link.line = line_no_;
    scenario_->links.push_back(link);
  }

  void parse_setting(const KeyValues& kv) {
    for (const auto& [key, value] : kv.pairs) {
      std::int64_t out = 0;
      if (!parse_int(value, &out)) {
        issue("setting '" + key + "' is not an integer");
        continue;
      }
      if (key == "floor") {
        scenario_->settings.bandwidth_floor = out;
      } else if (key == "max_paths") {
        scenario_->settings.max_paths = static_cast<std::size_t>(out);
      } else if (key == "offer_expiry_ms") {
        scenario_->settings.offer_expiry_ms = out;
      } else if (key == "min_extension_ms") {
        scenario_->settings.min_extension_ms = out;
      } else {
        issue("unknown setting '" + key + "'");
      }
    }
  }

  void parse_request(const KeyValues& kv) {
    RequestSpec spec;
    spec.id = text(kv, "id");
    spec.user = text(kv, "user");
    spec.submit_time = number(kv, "submit", 0, true);
    spec.source = text(kv, "source");
    spec.dest = text(kv, "dest");
    spec.priority = number(kv, "priority", 0, true);

    const std::string kind = text(kv, "kind");
    if (kind == "transfer") {
      spec.kind = RequestKind::kTransfer;
      spec.size = number(kv, "size", 0, true);
    } else if (kind == "reservation") {
      spec.kind = RequestKind::kReservation;
      spec.start = number(kv, "start", 0, true);
      spec.duration = number(kv, "duration", 0, true);
    } else if (!kind.empty()) {
      issue("kind must be transfer or reservation");
    }
    if (const std::string* bw = kv.find("bandwidth")) {
      std::int64_t out = 0;
      if (parse_int(*bw, &out)) {
        spec.bandwidth = out;
      } else {
        issue("field 'bandwidth' is not an integer");
      }
    }

    if (const std::string* c = kv.find("constraint")) {
      if (!parse_constraint(*c, &spec.constraint)) {
        issue("bad constraint '" + *c + "'");
      }
      if (spec.kind == RequestKind::kReservation &&
          spec.constraint != TimeConstraint::not_after(spec.start)) {
        issue("reservations fix their own window; omit constraint or use not_after:<start>");
      }
    } else if (spec.kind == RequestKind::kTransfer) {
      issue("missing field 'constraint'");
    }
    if (spec.kind == RequestKind::kReservation)
      spec.constraint = TimeConstraint::not_after(spec.start);

    const std::string accept = text(kv, "accept");
    if (accept == "first") {
      spec.accept_policy = RequestSpec::AcceptPolicy::kFirst;
    } else if (accept == "none") {
      spec.accept_policy = RequestSpec::AcceptPolicy::kNone;
    } else if (accept.rfind("index:", 0) == 0) {
      spec.accept_policy = RequestSpec::AcceptPolicy::kIndex;
      std::int64_t idx = 0;
      if (parse_int(accept.substr(6), &idx)) {
        spec.accept_index = static_cast<int>(idx);
      } else {
        issue("bad accept index");
      }
    } else if (!accept.empty()) {
      issue("accept must be first, index:<n> or none");
    }

    if (const std::string* f = kv.find("factor")) {
      try {
        spec.throughput_factor = parse_factor(*f);
      } catch (const Error& e) {
        issue(e.what());
      }
    }
    scenario_->requests.push_back(std::move(spec));
  }

  bool parse_constraint(const std::string& text, TimeConstraint* out) {
    if (text == "none") {
      *out = TimeConstraint::none();
      return true;
    }
    if (text == "asap") {
      *out = TimeConstraint::asap();
      return true;
    }
    const std::pair<std::string, ConstraintKind> bounded[] = {
        {"not_after:", ConstraintKind::kNotAfter},
        {"not_before:", ConstraintKind::kNotBefore},
    };
    for (const auto& [prefix, kind] : bounded) {
      if (text.rfind(prefix, 0) != 0) continue;
      std::int64_t bound = 0;
      if (!parse_int(text.substr(prefix.size()), &bound)) return false;
      *out = TimeConstraint{kind, bound};
      return true;
    }
    return false;
  }

  void parse_fuzz(const KeyValues& kv) {
    FuzzSpec fuzz;
    fuzz.seed = static_cast<std::uint64_t>(number(kv, "seed", 1));
    fuzz.nodes = static_cast<int>(number(kv, "nodes", fuzz.nodes));
    fuzz.links = static_cast<int>(number(kv, "links", fuzz.links));
    fuzz.requests = static_cast<int>(number(kv, "requests", fuzz.requests));
    fuzz.horizon = number(kv, "horizon", fuzz.horizon);
    if (const std::string* f = kv.find("factors")) {
      fuzz.factors.clear();
      std::istringstream is(*f);
      std::string piece;
      while (std::getline(is, piece, ',')) {
        try {
          fuzz.factors.push_back(parse_factor(piece));
        } catch (const Error& e) {
          issue(e.what());
        }
      }
    }
    scenario_->fuzz = fuzz;
  }

  Scenario* scenario_;
  std::vector<ValidationIssue>* issues_;
  int line_no_ = 0;
};

}  // namespace

Ratio parse_factor(const std::string& text) {
  // Decimal in (0, 1] with at most three places, e.g. "0.75" or "1".
  auto dot = text.find('.');
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  std::int64_t den = 1;
  std::string whole_part = dot == std::string::npos ? text : text.substr(0, dot);
  if (!parse_int(whole_part, &whole))
    throw Error(ErrorCode::kScenarioInvalid, "bad factor '" + text + "'");
  if (dot != std::string::npos) {
    std::string frac_part = text.substr(dot + 1);
    if (frac_part.empty() || frac_part.size() > 3 || !parse_int(frac_part, &frac))
      throw Error(ErrorCode::kScenarioInvalid, "bad factor '" + text + "'");
    for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
  }
  std::int64_t num = whole * den + frac;
  if (num <= 0 || num > den)
    throw Error(ErrorCode::kScenarioInvalid, "factor must be in (0, 1]: '" + text + "'");
  std::int64_t g = std::gcd(num, den);
  return Ratio{num / g, den / g};
}

std::string format_factor(const Ratio& ratio) {
  std::int64_t scaled = ratio.num * 1000 / ratio.den;
  std::string out = std::to_string(scaled / 1000);
  std::int64_t frac = scaled % 1000;
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), ".%03lld", static_cast<long long>(frac));
    out += buf;
    while (out.back() == '0') out.pop_back();
  }
  return out;
}

ParseResult parse_scenario(const std::string& text) {
  ParseResult result;
  LineParser parser(&result.scenario, &result.issues);
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    parser.feed(line, ++line_no);
  }
  return result;
}

namespace {

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.')
      return false;
  }
  return id.find(".ext") == std::string::npos;  // reserved for overrun extensions
}

}  // namespace

std::vector<ValidationIssue> validate(const Scenario& scenario) {
  std::vector<ValidationIssue> issues;
  auto add = [&](const std::string& path, const std::string& message) {
    issues.push_back({path, message});
  };

  if (scenario.fuzz) {
    const FuzzSpec& fuzz = *scenario.fuzz;
    if (!scenario.nodes.empty() || !scenario.links.empty() || !scenario.requests.empty())
      add("fuzz", "fuzz scenarios define no explicit nodes, links or requests");
    if (fuzz.nodes < 2 || fuzz.nodes > 8) add("fuzz.nodes", "must be in [2, 8]");
    if (fuzz.links < 1 || fuzz.links > 16) add("fuzz.links", "must be in [1, 16]");
    if (fuzz.requests < 1 || fuzz.requests > 64) add("fuzz.requests", "must be in [1, 64]");
    if (fuzz.horizon < 1000 || fuzz.horizon > kMaxTime) add("fuzz.horizon", "out of range");
    if (fuzz.factors.empty()) add("fuzz.factors", "needs at least one factor");
    return issues;
  }

  std::set<std::string> nodes;
  for (const ScenarioNode& node : scenario.nodes) {
    if (node.name.empty()) add("node", "empty node name");
    if (!nodes.insert(node.name).second) add("node[" + node.name + "]", "duplicate node");
  }

  std::set<std::string> link_ids;
  for (const ScenarioLink& link : scenario.links) {
    std::string path = "link[" + link.id + "]";
    if (!link_ids.insert(link.id).second) add(path, "duplicate link id");
    if (!nodes.count(link.source)) add(path + ".source", "unknown node '" + link.source + "'");
    if (!nodes.count(link.dest)) add(path + ".dest", "unknown node '" + link.dest + "'");
    if (link.source == link.dest) add(path, "source and dest must differ");
    if (link.capacity < 1 || link.capacity > kMaxBandwidth)
      add(path + ".capacity", "must be in [1, " + std::to_string(kMaxBandwidth) + "]");
  }

  const Settings& s = scenario.settings;
  if (s.bandwidth_floor < 1) add("settings.floor", "must be >= 1");
  if (s.max_paths < 1 || s.max_paths > 16) add("settings.max_paths", "must be in [1, 16]");
  if (s.offer_expiry_ms < 0) add("settings.offer_expiry_ms", "must be >= 0");
  if (s.min_extension_ms < 1) add("settings.min_extension_ms", "must be >= 1");

  std::set<std::string> request_ids;
  for (const RequestSpec& r : scenario.requests) {
    std::string path = "request[" + r.id + "]";
    if (!valid_id(r.id)) add(path + ".id", "ids use [A-Za-z0-9_.-] and cannot contain '.ext'");
    if (!request_ids.insert(r.id).second) add(path + ".id", "duplicate request id");
    if (r.user.empty()) add(path + ".user", "missing user");
    if (!nodes.count(r.source)) add(path + ".source", "unknown node '" + r.source + "'");
    if (!nodes.count(r.dest)) add(path + ".dest", "unknown node '" + r.dest + "'");
    if (!r.source.empty() && r.source == r.dest) add(path, "source and dest must differ");
    if (r.priority < 0 || r.priority > kMaxUserPriority) add(path + ".priority", "out of range");
    if (r.submit_time < 0 || r.submit_time > kMaxTime) add(path + ".submit", "out of range");
    if (r.throughput_factor.den <= 0 || r.throughput_factor.num <= 0 ||
        r.throughput_factor.num > r.throughput_factor.den)
      add(path + ".factor", "must be in (0, 1]");
    if (r.bandwidth && (*r.bandwidth < 1 || *r.bandwidth > kMaxBandwidth))
      add(path + ".bandwidth", "must be in [1, " + std::to_string(kMaxBandwidth) + "]");
    if (r.kind == RequestKind::kTransfer) {
      if (r.size < 1 || r.size > kMaxSize) add(path + ".size", "must be in [1, " + std::to_string(kMaxSize) + "]");
      if ((r.constraint.kind == ConstraintKind::kNotAfter ||
           r.constraint.kind == ConstraintKind::kNotBefore) &&
          (r.constraint.bound < 0 || r.constraint.bound > kMaxTime))
        add(path + ".constraint", "bound out of range");
    } else {
      if (!r.bandwidth) add(path + ".bandwidth", "reservations need a bandwidth");
      if (r.duration < 1 || r.duration > kMaxTime) add(path + ".duration", "out of range");
      if (r.start < r.submit_time) add(path + ".start", "reservation starts before submission");
      if (r.start > kMaxTime) add(path + ".start", "out of range");
      if (r.constraint != TimeConstraint::not_after(r.start))
        add(path + ".constraint", "reservations imply not_after:<start>");
    }
    if (r.accept_policy == RequestSpec::AcceptPolicy::kIndex && r.accept_index < 0)
      add(path + ".accept", "index must be >= 0");
  }
  return issues;
}

std::string emit_scenario(const Scenario& scenario) {
  std::ostringstream os;
  const Settings defaults;
  const Settings& s = scenario.settings;
  if (s.bandwidth_floor != defaults.bandwidth_floor) os << "set floor=" << s.bandwidth_floor << '\n';
  if (s.max_paths != defaults.max_paths) os << "set max_paths=" << s.max_paths << '\n';
  if (s.offer_expiry_ms != defaults.offer_expiry_ms)
    os << "set offer_expiry_ms=" << s.offer_expiry_ms << '\n';
  if (s.min_extension_ms != defaults.min_extension_ms)
    os << "set min_extension_ms=" << s.min_extension_ms << '\n';

  if (scenario.fuzz) {
    const FuzzSpec& f = *scenario.fuzz;
    os << "fuzz seed=" << f.seed << " nodes=" << f.nodes << " links=" << f.links
       << " requests=" << f.requests << " horizon=" << f.horizon << " factors=";
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
      if (i) os << ',';
      os << format_factor(f.factors[i]);
    }
    os << '\n';
    return os.str();
  }

  for (const ScenarioNode& node : scenario.nodes) os << "node " << node.name << '\n';
  for (const ScenarioLink& link : scenario.links) {
    os << "link id=" << link.id << " source=" << link.source << " dest=" << link.dest
       << " capacity=" << link.capacity << '\n';
  }
  for (const RequestSpec& r : scenario.requests) {
    os << "request id=" << r.id << " submit=" << r.submit_time << " user=" << r.user
       << " kind=" << to_string(r.kind) << " source=" << r.source << " dest=" << r.dest;
    if (r.kind == RequestKind::kTransfer) {
      os << " size=" << r.size;
    } else {
      os << " start=" << r.start << " duration=" << r.duration;
    }
    if (r.bandwidth) os << " bandwidth=" << *r.bandwidth;
    os << " priority=" << r.priority;
    if (r.kind == RequestKind::kTransfer) os << " constraint=" << to_string(r.constraint);
    switch (r.accept_policy) {
      case RequestSpec::AcceptPolicy::kFirst: os << " accept=first"; break;
      case RequestSpec::AcceptPolicy::kNone: os << " accept=none"; break;
      case RequestSpec::AcceptPolicy::kIndex: os << " accept=index:" << r.accept_index; break;
    }
    if (!(r.throughput_factor == Ratio{1, 1}))
      os << " factor=" << format_factor(r.throughput_factor);
    os << '\n';
  }
  return os.str();
}

namespace {

// Bounded pick keeps generated scenarios identical across standard
// libraries; std::uniform_int_distribution is not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::int64_t pick(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  template <typename T>
  const T& among(const std::vector<T>& values) {
    return values[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(values.size()) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

Scenario generate_fuzz(const FuzzSpec& spec) {
  Rng rng(spec.seed);
  Scenario out;
  out.fuzz.reset();

  const int node_count = static_cast<int>(rng.pick(2, spec.nodes));
  for (int i = 1; i <= node_count; ++i) out.nodes.push_back({"n" + std::to_string(i), 0});

  const std::vector<Kbps> capacities = {10000, 20000, 25000, 40000, 50000, 100000};
  int link_no = 0;
  for (int i = 1; i < node_count && link_no < spec.links; ++i) {
    out.links.push_back({"l" + std::to_string(++link_no), "n" + std::to_string(i),
                         "n" + std::to_string(i + 1), rng.among(capacities), 0});
  }
  while (link_no < spec.links) {
    int a = static_cast<int>(rng.pick(1, node_count));
    int b = static_cast<int>(rng.pick(1, node_count));
    if (a == b) continue;
    out.links.push_back({"l" + std::to_string(++link_no), "n" + std::to_string(a),
                         "n" + std::to_string(b), rng.among(capacities), 0});
  }

  const std::vector<std::string> users = {"alex", "bob", "carol"};
  const std::vector<Kbps> bandwidths = {5000, 10000, 20000, 25000};
  for (int i = 1; i <= spec.requests; ++i) {
    RequestSpec r;
    r.id = "fz-" + std::to_string(i);
    r.user = rng.among(users);
    r.submit_time = rng.pick(0, spec.horizon / 2);
    int a = static_cast<int>(rng.pick(1, node_count));
    int b = static_cast<int>(rng.pick(1, node_count));
    if (a == b) b = a % node_count + 1;
    r.source = "n" + std::to_string(a);
    r.dest = "n" + std::to_string(b);
    r.priority = rng.pick(1, 8);
    r.throughput_factor = spec.factors[static_cast<std::size_t>(
        rng.pick(0, static_cast<std::int64_t>(spec.factors.size()) - 1))];

    if (rng.pick(1, 10) <= 7) {
      r.kind = RequestKind::kTransfer;
      r.size = rng.pick(5, 200) * 1000;
      if (rng.pick(0, 1) == 1) r.bandwidth = rng.among(bandwidths);
      switch (rng.pick(0, 3)) {
        case 0: r.constraint = TimeConstraint::none(); break;
        case 1: r.constraint = TimeConstraint::asap(); break;
        case 2:
          r.constraint = TimeConstraint::not_after(r.submit_time + rng.pick(10000, spec.horizon));
          break;
        default:
          r.constraint = TimeConstraint::not_before(r.submit_time + rng.pick(0, spec.horizon / 2));
          break;
      }
    } else {
      r.kind = RequestKind::kReservation;
      r.bandwidth = rng.among(bandwidths);
      r.start = r.submit_time + rng.pick(0, spec.horizon / 2);
      r.duration = rng.pick(2000, 40000);
      r.constraint = TimeConstraint::not_after(r.start);
    }

    const std::int64_t roll = rng.pick(1, 10);
    if (roll <= 8) {
      r.accept_policy = RequestSpec::AcceptPolicy::kFirst;
    } else if (roll == 9) {
      r.accept_policy = RequestSpec::AcceptPolicy::kIndex;
      r.accept_index = static_cast<int>(rng.pick(0, 1));
    } else {
      r.accept_policy = RequestSpec::AcceptPolicy::kNone;
    }
    out.requests.push_back(std::move(r));
  }
  return out;
}

Scenario materialize(const Scenario& scenario) {
  if (!scenario.fuzz) return scenario;
  Scenario out = generate_fuzz(*scenario.fuzz);
  out.settings = scenario.settings;
  return out;
}

Topology build_topology(const Scenario& scenario) {
  Topology topology;
  for (const ScenarioNode& node : scenario.nodes) topology.add_node(node.name);
  for (const ScenarioLink& link : scenario.links) {
    topology.add_link(link.id, link.source, link.dest, link.capacity);
  }
  return topology;
}

}  // namespace tsched
