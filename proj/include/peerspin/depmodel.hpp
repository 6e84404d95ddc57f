#pragma once

// The node tree (installation directory layout) and the dependency edges laid
// over it. Edge status is a cache of the loading-rule outcome; every tree
// mutation has to be followed by revalidate_edges() for the touched names.

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "peerspin/registry.hpp"
#include "peerspin/semver.hpp"

namespace peerspin::depmodel {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Label of the root directory in tree positions.
inline constexpr const char* kRootLabel = "<root>";

enum class EdgeKind { Regular, Peer };
enum class EdgeStatus { Valid, Invalid, Missing };

const char* to_string(EdgeKind kind) noexcept;
const char* to_string(EdgeStatus status) noexcept;

struct Edge {
  NodeId from = kNoNode;
  std::string to_name;
  std::string spec;
  /// Absent when the spec is neither a range nor a known dist-tag.
  std::optional<semver::VersionRange> req;
  EdgeKind kind = EdgeKind::Regular;
  bool optional = false;
  EdgeStatus status = EdgeStatus::Missing;
  NodeId resolved = kNoNode;
};

struct EdgeRef {
  NodeId from = kNoNode;
  std::size_t index = 0;
  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

struct Node {
  NodeId id = kNoNode;
  std::string name;
  semver::Version version;
  registry::Selection source;
  NodeId parent = kNoNode;
  std::map<std::string, NodeId> children;
  std::vector<Edge> edges_out;
  bool alive = true;

  const registry::Manifest& manifest() const { return *source.manifest; }
};

/// Names from the root down to the node; the root itself is `["<root>"]`.
using TreePosition = std::vector<std::string>;

std::string to_string(const TreePosition& pos);

class NodeTree {
 public:
  struct EdgeChange {
    EdgeRef ref;
    EdgeStatus before = EdgeStatus::Missing;
    NodeId before_target = kNoNode;
  };

  /// `store` is used to resolve dist-tag specs on edges; it must outlive the tree.
  NodeTree(const registry::PackumentSource& store, registry::Selection root);

  NodeId root() const noexcept { return 0; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  bool alive(NodeId id) const { return id < nodes_.size() && nodes_[id].alive; }
  const Edge& edge(EdgeRef ref) const { return nodes_.at(ref.from).edges_out.at(ref.index); }

  /// Live node ids in ascending order.
  std::vector<NodeId> live_nodes() const;
  std::size_t live_count() const noexcept { return live_count_; }

  /// Adds a node under `parent`, which must not already hold the name. The new
  /// node's outgoing edges are created and resolved; other edges are untouched.
  NodeId add_child(NodeId parent, registry::Selection selection);

  /// Detaches `id` and its whole subtree. Returns the removed ids.
  std::vector<NodeId> remove_subtree(NodeId id);

  /// Directory-walk lookup: children of `from`, then of each ancestor up to root.
  std::optional<NodeId> resolve_name(NodeId from, const std::string& name) const;

  /// Directory where lookup for this edge starts. Peer edges look from the
  /// dependent's parent (they must be siblings), regular ones from the
  /// dependent's own children.
  NodeId lookup_start(const Edge& edge) const;

  /// Recomputes every live edge whose to_name is touched. Returns edges whose
  /// status or resolution changed.
  std::vector<EdgeChange> revalidate_edges(const std::set<std::string>& touched);

  /// Recomputes all edges from scratch; used by tests and debug checks.
  std::vector<EdgeChange> revalidate_all();

  TreePosition position(NodeId id) const;
  std::size_t depth(NodeId id) const;

  /// True if `id` equals `ancestor` or lies below it.
  bool in_subtree(NodeId id, NodeId ancestor) const;

  /// Live edges whose resolution is `target`, in (from, index) order.
  std::vector<EdgeRef> in_edges(NodeId target) const;
  bool has_regular_in_edge(NodeId target) const;

  /// Empty when well-formed; otherwise one message per violation.
  std::vector<std::string> check_well_formed() const;

 private:
  void resolve_edge(Edge& e) const;
  Edge make_edge(NodeId from, const std::string& name, const std::string& spec, EdgeKind kind,
                 bool optional) const;

  const registry::PackumentSource* store_;
  std::vector<Node> nodes_;
  std::size_t live_count_ = 0;
};

/// Parses an edge spec: a range, or a dist-tag of the target packument which is
/// pinned to its exact version. Absent for anything else.
std::optional<semver::VersionRange> parse_spec(const registry::PackumentSource& store,
                                               const std::string& name, const std::string& spec);

struct PeerMember {
  registry::Selection selection;
  /// The member that first declared this peer, and the spec it used.
  std::string required_by;
  std::string spec;
  semver::VersionRange req;

  const std::string& name() const { return selection.manifest->name; }
  const semver::Version& version() const { return selection.manifest->version; }
};

/// A peer requirement that the chosen member or context version does not meet.
struct PeerConflict {
  std::string from;
  std::string to;
  std::string spec;
  semver::Version bound;
};

struct PeerSet {
  registry::Selection entry;
  /// Peers selected from the store, in breadth-first order. Excludes the entry.
  std::vector<PeerMember> members;
  /// Peers satisfied or bound by versions already visible at the target level.
  std::map<std::string, semver::Version> context_bound;
  std::vector<PeerConflict> conflicts;
  /// Optional peers left out of the closure.
  std::vector<std::string> skipped_optional;

  bool contains(const std::string& name) const;
};

/// Breadth-first closure over peerDependencies. A name visible in `context`
/// binds the member even when it does not satisfy; the mismatch is recorded as
/// a conflict rather than raised. Throws PackageNotFound / NoSatisfyingVersion /
/// MalformedRange for an unbound non-optional peer the store cannot satisfy.
PeerSet compute_peer_set(registry::Selection entry, const registry::PackumentSource& store,
                         const std::map<std::string, semver::Version>& context);

}  // namespace peerspin::depmodel
