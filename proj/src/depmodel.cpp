#include "peerspin/depmodel.hpp"

#include <algorithm>
#include <deque>

namespace peerspin::depmodel {

const char* to_string(EdgeKind kind) noexcept { return kind == EdgeKind::Peer ? "peer" : "regular"; }

const char* to_string(EdgeStatus status) noexcept {
  switch (status) {
    case EdgeStatus::Valid: return "valid";
    case EdgeStatus::Invalid: return "invalid";
    case EdgeStatus::Missing: return "missing";
  }
  return "?";
}

std::string to_string(const TreePosition& pos) {
  std::string out;
  for (const auto& part : pos) {
    if (!out.empty()) out += '/';
    out += part;
  }
  return out;
}

std::optional<semver::VersionRange> parse_spec(const registry::PackumentSource& store,
                                               const std::string& name, const std::string& spec) {
  if (auto r = semver::try_parse_range(spec)) return r;
  auto packument = store.find(name);
  if (!packument) return std::nullopt;
  auto tag = packument->dist_tags.find(spec);
  if (tag == packument->dist_tags.end()) return std::nullopt;
  return semver::parse_range(tag->second);
}

NodeTree::NodeTree(const registry::PackumentSource& store, registry::Selection root) : store_(&store) {
  Node n;
  n.id = 0;
  n.name = root.manifest->name;
  n.version = root.manifest->version;
  n.source = std::move(root);
  nodes_.push_back(std::move(n));
  live_count_ = 1;
  auto& r = nodes_[0];
  const auto& m = r.manifest();
  for (const auto& [dep, spec] : m.dependencies) r.edges_out.push_back(make_edge(0, dep, spec, EdgeKind::Regular, false));
  for (const auto& [dep, spec] : m.peer_dependencies) {
    r.edges_out.push_back(make_edge(0, dep, spec, EdgeKind::Peer, m.is_optional_peer(dep)));
  }
  std::stable_sort(r.edges_out.begin(), r.edges_out.end(),
                   [](const Edge& a, const Edge& b) { return a.to_name < b.to_name; });
  for (auto& e : nodes_[0].edges_out) resolve_edge(e);
}

Edge NodeTree::make_edge(NodeId from, const std::string& name, const std::string& spec, EdgeKind kind,
                         bool optional) const {
  Edge e;
  e.from = from;
  e.to_name = name;
  e.spec = spec;
  e.req = parse_spec(*store_, name, spec);
  e.kind = kind;
  e.optional = optional;
  return e;
}

std::vector<NodeId> NodeTree::live_nodes() const {
  std::vector<NodeId> out;
  out.reserve(live_count_);
  for (const auto& n : nodes_) {
    if (n.alive) out.push_back(n.id);
  }
  return out;
}

NodeId NodeTree::add_child(NodeId parent, registry::Selection selection) {
  const auto id = static_cast<NodeId>(nodes_.size());
  Node n;
  n.id = id;
  n.name = selection.manifest->name;
  n.version = selection.manifest->version;
  n.source = std::move(selection);
  n.parent = parent;
  const auto& m = n.manifest();
  for (const auto& [dep, spec] : m.dependencies) n.edges_out.push_back(make_edge(id, dep, spec, EdgeKind::Regular, false));
  for (const auto& [dep, spec] : m.peer_dependencies) {
    n.edges_out.push_back(make_edge(id, dep, spec, EdgeKind::Peer, m.is_optional_peer(dep)));
  }
  std::stable_sort(n.edges_out.begin(), n.edges_out.end(),
                   [](const Edge& a, const Edge& b) { return a.to_name < b.to_name; });
  auto name = n.name;
  nodes_.push_back(std::move(n));
  ++live_count_;
  nodes_.at(parent).children.emplace(name, id);
  for (auto& e : nodes_[id].edges_out) resolve_edge(e);
  return id;
}

std::vector<NodeId> NodeTree::remove_subtree(NodeId id) {
  std::vector<NodeId> removed;
  if (!alive(id) || id == root()) return removed;
  auto& parent = nodes_.at(nodes_[id].parent);
  parent.children.erase(nodes_[id].name);
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    auto& n = nodes_[cur];
    n.alive = false;
    --live_count_;
    removed.push_back(cur);
    for (const auto& [_, child] : n.children) stack.push_back(child);
  }
  return removed;
}

std::optional<NodeId> NodeTree::resolve_name(NodeId from, const std::string& name) const {
  for (NodeId dir = from; dir != kNoNode; dir = nodes_[dir].parent) {
    const auto& children = nodes_[dir].children;
    if (auto it = children.find(name); it != children.end()) return it->second;
  }
  return std::nullopt;
}

NodeId NodeTree::lookup_start(const Edge& edge) const {
  const auto& from = nodes_.at(edge.from);
  if (edge.kind == EdgeKind::Peer && from.parent != kNoNode) return from.parent;
  return edge.from;
}

void NodeTree::resolve_edge(Edge& e) const {
  auto target = resolve_name(lookup_start(e), e.to_name);
  if (!target) {
    e.resolved = kNoNode;
    e.status = EdgeStatus::Missing;
    return;
  }
  e.resolved = *target;
  e.status = e.req && e.req->satisfied_by(nodes_[*target].version) ? EdgeStatus::Valid : EdgeStatus::Invalid;
}

std::vector<NodeTree::EdgeChange> NodeTree::revalidate_edges(const std::set<std::string>& touched) {
  std::vector<EdgeChange> changed;
  if (touched.empty()) return changed;
  for (auto& n : nodes_) {
    if (!n.alive) continue;
    for (std::size_t i = 0; i < n.edges_out.size(); ++i) {
      auto& e = n.edges_out[i];
      if (!touched.contains(e.to_name)) continue;
      auto before_status = e.status;
      auto before_target = e.resolved;
      resolve_edge(e);
      if (e.status != before_status || e.resolved != before_target) {
        changed.push_back({{n.id, i}, before_status, before_target});
      }
    }
  }
  return changed;
}

std::vector<NodeTree::EdgeChange> NodeTree::revalidate_all() {
  std::vector<EdgeChange> changed;
  for (auto& n : nodes_) {
    if (!n.alive) continue;
    for (std::size_t i = 0; i < n.edges_out.size(); ++i) {
      auto& e = n.edges_out[i];
      auto before_status = e.status;
      auto before_target = e.resolved;
      resolve_edge(e);
      if (e.status != before_status || e.resolved != before_target) {
        changed.push_back({{n.id, i}, before_status, before_target});
      }
    }
  }
  return changed;
}

TreePosition NodeTree::position(NodeId id) const {
  TreePosition pos;
  for (NodeId cur = id; cur != kNoNode; cur = nodes_.at(cur).parent) {
    pos.push_back(cur == root() ? kRootLabel : nodes_[cur].name);
  }
  std::reverse(pos.begin(), pos.end());
  return pos;
}

std::size_t NodeTree::depth(NodeId id) const {
  std::size_t d = 0;
  for (NodeId cur = nodes_.at(id).parent; cur != kNoNode; cur = nodes_[cur].parent) ++d;
  return d;
}

bool NodeTree::in_subtree(NodeId id, NodeId ancestor) const {
  for (NodeId cur = id; cur != kNoNode; cur = nodes_.at(cur).parent) {
    if (cur == ancestor) return true;
  }
  return false;
}

std::vector<EdgeRef> NodeTree::in_edges(NodeId target) const {
  std::vector<EdgeRef> out;
  for (const auto& n : nodes_) {
    if (!n.alive) continue;
    for (std::size_t i = 0; i < n.edges_out.size(); ++i) {
      if (n.edges_out[i].resolved == target) out.push_back({n.id, i});
    }
  }
  return out;
}

bool NodeTree::has_regular_in_edge(NodeId target) const {
  for (const auto& n : nodes_) {
    if (!n.alive) continue;
    for (const auto& e : n.edges_out) {
      if (e.resolved == target && e.kind == EdgeKind::Regular) return true;
    }
  }
  return false;
}

std::vector<std::string> NodeTree::check_well_formed() const {
  std::vector<std::string> problems;
  if (!nodes_.at(root()).alive || nodes_[root()].parent != kNoNode) problems.push_back("root missing or parented");
  std::size_t reachable = 0;
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    ++reachable;
    for (const auto& [name, child] : nodes_[cur].children) {
      const auto& c = nodes_.at(child);
      if (!c.alive) problems.push_back("dead child " + name + " under " + to_string(position(cur)));
      if (c.name != name) problems.push_back("child keyed " + name + " holds " + c.name);
      if (c.parent != cur) problems.push_back("child " + name + " has wrong parent");
      stack.push_back(child);
    }
  }
  if (reachable != live_count_) problems.push_back("live nodes unreachable from root");
  for (const auto& n : nodes_) {
    if (!n.alive) continue;
    for (const auto& e : n.edges_out) {
      Edge copy = e;
      resolve_edge(copy);
      if (copy.status != e.status || copy.resolved != e.resolved) {
        problems.push_back("stale edge " + n.name + " -> " + e.to_name);
      }
      if (e.status == EdgeStatus::Valid &&
          (e.resolved == kNoNode || nodes_[e.resolved].name != e.to_name || !e.req ||
           !e.req->satisfied_by(nodes_[e.resolved].version))) {
        problems.push_back("unsound valid edge " + n.name + " -> " + e.to_name);
      }
    }
  }
  return problems;
}

bool PeerSet::contains(const std::string& name) const {
  if (entry.manifest->name == name) return true;
  return std::any_of(members.begin(), members.end(), [&](const PeerMember& m) { return m.name() == name; });
}

PeerSet compute_peer_set(registry::Selection entry, const registry::PackumentSource& store,
                         const std::map<std::string, semver::Version>& context) {
  PeerSet set;
  set.entry = entry;
  std::deque<const registry::Manifest*> pending{entry.manifest};
  auto chosen = [&](const std::string& name) -> const semver::Version* {
    if (set.entry.manifest->name == name) return &set.entry.manifest->version;
    for (const auto& m : set.members) {
      if (m.name() == name) return &m.version();
    }
    if (auto it = set.context_bound.find(name); it != set.context_bound.end()) return &it->second;
    return nullptr;
  };

  while (!pending.empty()) {
    const auto* manifest = pending.front();
    pending.pop_front();
    for (const auto& [peer, spec] : manifest->peer_dependencies) {
      if (manifest->is_optional_peer(peer)) {
        if (std::find(set.skipped_optional.begin(), set.skipped_optional.end(), peer) == set.skipped_optional.end()) {
          set.skipped_optional.push_back(peer);
        }
        continue;
      }
      auto req = parse_spec(store, peer, spec);
      if (!req) throw MalformedRange(spec);
      const semver::Version* existing = chosen(peer);
      if (!existing) {
        if (auto it = context.find(peer); it != context.end()) {
          existing = &set.context_bound.emplace(peer, it->second).first->second;
        }
      }
      if (existing) {
        if (!req->satisfied_by(*existing)) set.conflicts.push_back({manifest->name, peer, spec, *existing});
        continue;
      }
      auto selection = registry::select_version(store, peer, *req, spec);
      set.members.push_back({selection, manifest->name, spec, *req});
      pending.push_back(selection.manifest);
    }
  }
  return set;
}

}  // namespace peerspin::depmodel
