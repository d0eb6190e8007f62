#ifndef TSCHED_TOPOLOGY_HPP
#define TSCHED_TOPOLOGY_HPP

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "tsched/types.hpp"

namespace tsched {

/// A directed capacity-annotated edge of the network graph. Bidirectional
/// connectivity is modeled as two links, one per direction.
struct Link {
  std::string id;
  std::string name;
  std::string source;
  std::string dest;
  Kbps capacity = 0;
};

/// An ordered chain of links between two nodes. Always simple: no node
/// appears twice. Owns its link records, so paths stay valid inside
/// reports that outlive the topology.
struct Path {
  std::vector<Link> links;

  const std::string& source() const { return links.front().source; }
  const std::string& dest() const { return links.back().dest; }
  Kbps bottleneck() const;
  std::size_t hops() const { return links.size(); }
  /// Link ids joined with '+', e.g. "link1+link2". Used as the profile id
  /// of the path in snapshots.
  std::string id() const;
};

/// The abstracted network graph the scheduler operates on. Immutable once a
/// scheduling session starts; nothing here is mutated by placements.
class Topology {
 public:
  /// Registers a node. Throws DuplicateNode if the name is taken.
  void add_node(const std::string& name);

  /// Registers a directed link; the id doubles as the link name. Throws
  /// UnknownNode for unregistered endpoints, InvalidCapacity for
  /// capacity <= 0 and DuplicateLink for a reused id.
  const Link& add_link(const std::string& id, const std::string& source, const std::string& dest,
                       Kbps capacity_kbps);

  bool has_node(const std::string& name) const;
  const Link* find_link(const std::string& id) const;

  const std::vector<std::string>& nodes() const { return node_order_; }
  const std::deque<Link>& links() const { return links_; }

  /// All simple paths from source to dest, ordered by descending bottleneck
  /// capacity, then fewer hops, then lexicographic link-id sequence. At most
  /// max_paths entries; empty when the nodes are not connected.
  std::vector<Path> enumerate_paths(const std::string& source, const std::string& dest,
                                    std::size_t max_paths) const;

 private:
  std::vector<std::string> node_order_;
  // Deque keeps link addresses stable; Path holds pointers into it.
  std::deque<Link> links_;
};

}  // namespace tsched

#endif
