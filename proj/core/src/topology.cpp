#include "tsched/topology.hpp"

#include <algorithm>
#include <set>

#include "tsched/error.hpp"

namespace tsched {

Kbps Path::bottleneck() const {
  Kbps bw = kTimeInfinity;
  for (const Link& link : links) bw = std::min(bw, link.capacity);
  return bw;
}

std::string Path::id() const {
  std::string out;
  for (const Link& link : links) {
    if (!out.empty()) out += '+';
    out += link.id;
  }
  return out;
}

void Topology::add_node(const std::string& name) {
  if (name.empty()) throw Error(ErrorCode::kPreconditionViolated, "node name must be non-empty");
  if (has_node(name)) throw Error(ErrorCode::kDuplicateNode, "node '" + name + "' already registered");
  node_order_.push_back(name);
}

const Link& Topology::add_link(const std::string& id, const std::string& source,
                               const std::string& dest, Kbps capacity_kbps) {
  if (find_link(id)) throw Error(ErrorCode::kDuplicateLink, "link '" + id + "' already registered");
  if (!has_node(source)) throw Error(ErrorCode::kUnknownNode, "link '" + id + "' source '" + source + "'");
  if (!has_node(dest)) throw Error(ErrorCode::kUnknownNode, "link '" + id + "' dest '" + dest + "'");
  if (source == dest)
    throw Error(ErrorCode::kPreconditionViolated, "link '" + id + "' connects a node to itself");
  if (capacity_kbps <= 0)
    throw Error(ErrorCode::kInvalidCapacity, "link '" + id + "' capacity must be positive");
  links_.push_back(Link{id, id, source, dest, capacity_kbps});
  return links_.back();
}

bool Topology::has_node(const std::string& name) const {
  return std::find(node_order_.begin(), node_order_.end(), name) != node_order_.end();
}

const Link* Topology::find_link(const std::string& id) const {
  for (const Link& link : links_) {
    if (link.id == id) return &link;
  }
  return nullptr;
}

namespace {

void collect_paths(const std::deque<Link>& links, const std::string& at, const std::string& dest,
                   std::set<std::string>& visited, std::vector<Link>& chain,
                   std::vector<Path>& out) {
  if (at == dest) {
    out.push_back(Path{chain});
    return;
  }
  for (const Link& link : links) {
    if (link.source != at || visited.count(link.dest)) continue;
    visited.insert(link.dest);
    chain.push_back(link);
    collect_paths(links, link.dest, dest, visited, chain, out);
    chain.pop_back();
    visited.erase(link.dest);
  }
}

std::vector<std::string> link_id_sequence(const Path& path) {
  std::vector<std::string> ids;
  ids.reserve(path.links.size());
  for (const Link& link : path.links) ids.push_back(link.id);
  return ids;
}

}  // namespace

std::vector<Path> Topology::enumerate_paths(const std::string& source, const std::string& dest,
                                            std::size_t max_paths) const {
  if (!has_node(source)) throw Error(ErrorCode::kUnknownNode, "path source '" + source + "'");
  if (!has_node(dest)) throw Error(ErrorCode::kUnknownNode, "path dest '" + dest + "'");
  if (source == dest)
    throw Error(ErrorCode::kPreconditionViolated, "path source and dest must differ");

  std::vector<Path> found;
  std::set<std::string> visited{source};
  std::vector<Link> chain;
  collect_paths(links_, source, dest, visited, chain, found);

  std::sort(found.begin(), found.end(), [](const Path& a, const Path& b) {
    if (a.bottleneck() != b.bottleneck()) return a.bottleneck() > b.bottleneck();
    if (a.hops() != b.hops()) return a.hops() < b.hops();
    return link_id_sequence(a) < link_id_sequence(b);
  });
  if (found.size() > max_paths) found.resize(max_paths);
  return found;
}

}  // namespace tsched
