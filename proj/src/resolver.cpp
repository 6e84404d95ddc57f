#include "peerspin/resolver.hpp"

#include <algorithm>
#include <stdexcept>

namespace peerspin {

using depmodel::EdgeKind;
using depmodel::EdgeStatus;
using depmodel::kNoNode;
using depmodel::NodeId;
using depmodel::NodeTree;

const char* to_string(PlacementType type) noexcept {
  switch (type) {
    case PlacementType::Add: return "ADD";
    case PlacementType::Keep: return "KEEP";
    case PlacementType::Replace: return "REPLACE";
    case PlacementType::Conflict: return "CONFLICT";
  }
  return "?";
}

bool same_placement(const PlacementLogEntry& a, const PlacementLogEntry& b) {
  return a.action == b.action && a.name == b.name && a.version == b.version && a.position == b.position;
}

const char* to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::Clean: return "clean";
    case Verdict::PeerSpin: return "peerspin";
    case Verdict::Unresolvable: return "unresolvable";
    case Verdict::IterationLimit: return "iteration-limit";
  }
  return "?";
}

Verdict ResolutionOutcome::verdict() const noexcept {
  switch (result.index()) {
    case 0: return Verdict::Clean;
    case 1: return Verdict::PeerSpin;
    case 2: return Verdict::Unresolvable;
    default: return Verdict::IterationLimit;
  }
}

namespace {

bool edge_needs_work(const depmodel::Edge& e) {
  if (e.status == EdgeStatus::Valid) return false;
  if (e.optional && e.status == EdgeStatus::Missing) return false;
  return true;
}

// Names visible from `dir`, nearest directory first.
std::map<std::string, semver::Version> visible_versions(const NodeTree& tree, NodeId dir) {
  std::map<std::string, semver::Version> out;
  for (NodeId d = dir; d != kNoNode; d = tree.node(d).parent) {
    for (const auto& [name, child] : tree.node(d).children) out.emplace(name, tree.node(child).version);
  }
  return out;
}

// Peer closure of `start` through resolved peer edges that are currently valid.
std::vector<NodeId> valid_peer_closure(const NodeTree& tree, NodeId start) {
  std::vector<NodeId> out;
  std::set<NodeId> seen{start};
  std::vector<NodeId> pending{start};
  while (!pending.empty()) {
    auto cur = pending.back();
    pending.pop_back();
    for (const auto& e : tree.node(cur).edges_out) {
      if (e.kind != EdgeKind::Peer || e.status != EdgeStatus::Valid) continue;
      if (seen.insert(e.resolved).second) {
        out.push_back(e.resolved);
        pending.push_back(e.resolved);
      }
    }
  }
  return out;
}

// True if some directory on [from, until) holds a child named `name`.
bool blocked_between(const NodeTree& tree, NodeId from, NodeId until, const std::string& name) {
  for (NodeId d = from; d != until && d != kNoNode; d = tree.node(d).parent) {
    if (tree.node(d).children.contains(name)) return true;
  }
  return false;
}

}  // namespace

Resolver::Resolver(const registry::PackumentSource& store, registry::Selection root, ResolutionConfig config)
    : store_(&store),
      config_(config),
      tree_(std::make_shared<NodeTree>(store, std::move(root))) {
  if (config_.max_iterations == 0) throw Error(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
  queue_.push_back(tree_->root());
  pending_.insert(tree_->root());
}

void Resolver::log_placement(PlacementType type, const std::string& name, const semver::Version& v,
                             depmodel::TreePosition pos) {
  log_.push_back({++seq_, type, name, v, std::move(pos)});
}

LoadedGroup Resolver::load_group(NodeId current, std::size_t edge_index) const {
  const auto& e = tree_->node(current).edges_out.at(edge_index);
  if (!e.req) throw MalformedRange(e.spec);
  auto selection = registry::select_version(*store_, e.to_name, *e.req, e.spec);
  LoadedGroup group;
  group.edge_index = edge_index;
  group.start = e.kind == EdgeKind::Peer ? tree_->lookup_start(e) : current;
  group.peer_set = depmodel::compute_peer_set(std::move(selection), *store_, visible_versions(*tree_, group.start));
  return group;
}

std::vector<LoadedGroup> Resolver::load_nodes(NodeId current) const {
  std::vector<LoadedGroup> groups;
  const auto& edges = tree_->node(current).edges_out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edge_needs_work(edges[i])) groups.push_back(load_group(current, i));
  }
  return groups;
}

bool Resolver::shadows_visible_peer(const std::string& name, NodeId pos) const {
  // A PeerSource below `pos` must keep seeing the same copy of every peer its
  // entry relies on.
  for (NodeId s : tree_->live_nodes()) {
    if (!tree_->in_subtree(s, pos)) continue;
    for (const auto& e : tree_->node(s).edges_out) {
      if (e.kind != EdgeKind::Regular || e.status != EdgeStatus::Valid) continue;
      if (tree_->in_subtree(tree_->node(e.resolved).parent, pos)) continue;
      for (NodeId peer : valid_peer_closure(*tree_, e.resolved)) {
        const auto& p = tree_->node(peer);
        if (p.name == name && !tree_->in_subtree(p.parent, pos)) return true;
      }
    }
  }
  return false;
}

PlacementType Resolver::can_place(const Candidate& n, NodeId pos, NodeId start) const {
  const auto& name = n.name();
  const auto& dir = tree_->node(pos);

  if (pos != start) {
    // Anything nearer to the requester with the same name would shadow us.
    if (blocked_between(*tree_, start, pos, name)) return PlacementType::Conflict;
    if (n.peer_set) {
      for (const auto& m : n.peer_set->members) {
        if (blocked_between(*tree_, start, pos, m.name())) return PlacementType::Conflict;
        auto it = dir.children.find(m.name());
        if (it != dir.children.end() && !m.req.satisfied_by(tree_->node(it->second).version)) {
          return PlacementType::Conflict;
        }
      }
    }
  }

  if (auto it = dir.children.find(name); it != dir.children.end()) {
    const auto& incumbent = tree_->node(it->second);
    if (incumbent.version == n.version() || (n.req && n.req->satisfied_by(incumbent.version))) {
      return PlacementType::Keep;
    }
    if (pos == start) return PlacementType::Replace;
    for (const auto& ref : tree_->in_edges(incumbent.id)) {
      const auto& e = tree_->edge(ref);
      if (e.status == EdgeStatus::Valid && !(e.req && e.req->satisfied_by(n.version()))) {
        return PlacementType::Conflict;
      }
    }
    return PlacementType::Replace;
  }

  // Empty slot: adding here must not capture a currently valid edge below
  // `pos` that resolves above it, unless we satisfy that edge too.
  for (NodeId s : tree_->live_nodes()) {
    if (!tree_->in_subtree(s, pos)) continue;
    for (const auto& e : tree_->node(s).edges_out) {
      if (e.to_name != name || e.status != EdgeStatus::Valid) continue;
      auto lookup = tree_->lookup_start(e);
      if (!tree_->in_subtree(lookup, pos)) continue;
      if (tree_->in_subtree(tree_->node(e.resolved).parent, pos)) continue;
      if (!(e.req && e.req->satisfied_by(n.version()))) return PlacementType::Conflict;
    }
  }
  if (shadows_visible_peer(name, pos)) return PlacementType::Conflict;
  return PlacementType::Add;
}

PlaceResult Resolver::place(const Candidate& n, NodeId start) {
  PlaceResult result;
  PlacementType type = PlacementType::Conflict;
  NodeId last = kNoNode;
  for (NodeId pos = start; pos != kNoNode; pos = tree_->node(pos).parent) {
    auto t = can_place(n, pos, start);
    if (t == PlacementType::Conflict) break;
    type = t;
    last = pos;
  }

  if (type == PlacementType::Conflict) {
    auto pos = tree_->position(start);
    pos.push_back(n.name());
    log_placement(PlacementType::Conflict, n.name(), n.version(), std::move(pos));
    result.type = PlacementType::Conflict;
    return result;
  }
  if (type == PlacementType::Keep) {
    NodeId incumbent = tree_->node(last).children.at(n.name());
    log_placement(PlacementType::Keep, n.name(), tree_->node(incumbent).version, tree_->position(incumbent));
    result.type = PlacementType::Keep;
    result.node = incumbent;
    return result;
  }

  std::set<std::string> touched{n.name()};
  std::optional<PackageRef> replaced;
  if (type == PlacementType::Replace) {
    NodeId old = tree_->node(last).children.at(n.name());
    replaced = PackageRef{tree_->node(old).name, tree_->node(old).version};
    for (NodeId gone : tree_->remove_subtree(old)) touched.insert(tree_->node(gone).name);
  }
  NodeId fresh = tree_->add_child(last, n.selection);
  auto changes = tree_->revalidate_edges(touched);
  log_placement(type, n.name(), n.version(), tree_->position(fresh));
  result.type = type;
  result.node = fresh;

  if (replaced && config_.detector_enabled) {
    result.report = on_replace(*replaced, fresh, *tree_, ledger_, seq_, iterations_);
    if (result.report) return result;
  }
  prune(std::move(changes));
  if (config_.debug_checks) debug_check();
  return result;
}

std::vector<NodeId> Resolver::prune(std::vector<NodeTree::EdgeChange> changes) {
  std::vector<NodeId> removed_all;
  while (true) {
    std::vector<NodeId> doomed;
    for (const auto& change : changes) {
      if (!tree_->alive(change.ref.from)) continue;
      const auto& e = tree_->edge(change.ref);
      if (e.status == EdgeStatus::Valid) continue;
      if (e.optional && e.status == EdgeStatus::Missing) continue;
      NodeId from = change.ref.from;
      // A pure peer member whose own peer contract broke is dropped; the
      // entry that needs it will be revisited and reload it.
      if (change.before == EdgeStatus::Valid && e.kind == EdgeKind::Peer && from != tree_->root() &&
          !tree_->has_regular_in_edge(from)) {
        doomed.push_back(from);
      } else {
        invalidated_.insert(from);
      }
    }

    // Anything no longer reachable from the root through edges is garbage.
    std::set<NodeId> reachable{tree_->root()};
    std::vector<NodeId> pending{tree_->root()};
    std::set<NodeId> doomed_set(doomed.begin(), doomed.end());
    while (!pending.empty()) {
      auto cur = pending.back();
      pending.pop_back();
      if (doomed_set.contains(cur)) continue;
      for (const auto& e : tree_->node(cur).edges_out) {
        if (e.resolved != kNoNode && reachable.insert(e.resolved).second) pending.push_back(e.resolved);
      }
    }
    for (NodeId id : tree_->live_nodes()) {
      if (!reachable.contains(id) && !doomed_set.contains(id)) doomed.push_back(id);
    }
    std::set<std::string> touched;
    for (NodeId id : doomed) {
      for (NodeId gone : tree_->remove_subtree(id)) {
        touched.insert(tree_->node(gone).name);
        removed_all.push_back(gone);
      }
    }
    if (touched.empty()) break;
    changes = tree_->revalidate_edges(touched);
  }
  return removed_all;
}

void Resolver::update_queue(const std::vector<NodeId>& placed, const std::set<NodeId>& invalidated) {
  auto by_position = [&](std::vector<NodeId> ids) {
    std::erase_if(ids, [&](NodeId id) { return !tree_->alive(id); });
    std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
      auto pa = tree_->position(a);
      auto pb = tree_->position(b);
      return pa != pb ? pa < pb : a < b;
    });
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  };
  for (auto ids : {by_position(placed), by_position({invalidated.begin(), invalidated.end()})}) {
    for (NodeId id : ids) {
      if (pending_.insert(id).second) queue_.push_back(id);
    }
  }
}

bool Resolver::step() {
  if (terminal_) return false;
  while (!queue_.empty() && !tree_->alive(queue_.front())) {
    pending_.erase(queue_.front());
    queue_.pop_front();
  }
  if (queue_.empty()) return false;
  if (iterations_ >= config_.max_iterations) {
    IterationLimitExceeded limit;
    auto tail = std::min<std::size_t>(log_.size(), 64);
    limit.tail.assign(log_.end() - static_cast<std::ptrdiff_t>(tail), log_.end());
    terminal_ = std::move(limit);
    return false;
  }

  NodeId current = queue_.front();
  queue_.pop_front();
  pending_.erase(current);
  ++iterations_;

  std::vector<NodeId> placed;
  invalidated_.clear();
  const std::size_t edge_count = tree_->node(current).edges_out.size();

  auto fail = [&](std::string why) {
    terminal_ = Unresolvable{std::move(why)};
    return false;
  };

  for (std::size_t i = 0; i < edge_count; ++i) {
    if (!tree_->alive(current)) break;
    const auto& edge = tree_->node(current).edges_out[i];
    if (!edge_needs_work(edge)) continue;
    const std::string requester = tree_->node(current).name + "@" + tree_->node(current).version.to_string();

    LoadedGroup group;
    try {
      group = load_group(current, i);
    } catch (const Error& err) {
      return fail(requester + ": " + err.what());
    }
    for (const auto& name : group.peer_set.skipped_optional) {
      if (std::find(skipped_optional_.begin(), skipped_optional_.end(), name) == skipped_optional_.end()) {
        skipped_optional_.push_back(name);
      }
    }

    // Copied: placement grows the node arena and would invalidate a reference.
    const semver::VersionRange req = *tree_->node(current).edges_out[i].req;
    Candidate entry{group.peer_set.entry, &req, &group.peer_set};
    auto placed_entry = place(entry, group.start);
    if (placed_entry.report) {
      terminal_ = PeerSpin{std::move(*placed_entry.report)};
      return false;
    }
    if (placed_entry.type == PlacementType::Conflict) {
      return fail(requester + ": cannot place " + entry.name() + "@" + entry.version().to_string() +
                  " without breaking the tree");
    }
    if (placed_entry.type == PlacementType::Keep) continue;
    placed.push_back(placed_entry.node);

    std::map<std::string, NodeId> holder{{entry.name(), placed_entry.node}};
    for (const auto& member : group.peer_set.members) {
      if (!tree_->alive(placed_entry.node)) break;
      auto req_it = holder.find(member.required_by);
      if (req_it == holder.end() || !tree_->alive(req_it->second)) continue;
      const auto& requirer = tree_->node(req_it->second);
      NodeId member_start = requirer.parent == kNoNode ? requirer.id : requirer.parent;
      Candidate c{member.selection, &member.req, nullptr};
      auto r = place(c, member_start);
      if (r.report) {
        terminal_ = PeerSpin{std::move(*r.report)};
        return false;
      }
      if (r.type == PlacementType::Conflict) {
        return fail(requester + ": cannot place peer " + c.name() + "@" + c.version().to_string() +
                    " of " + entry.name());
      }
      holder[member.name()] = r.node;
      if (r.type != PlacementType::Keep) placed.push_back(r.node);
    }
  }

  update_queue(placed, invalidated_);
  return true;
}

ResolutionOutcome Resolver::run() {
  while (step()) {
  }
  ResolutionOutcome outcome;
  outcome.log = log_;
  outcome.iterations = iterations_;
  outcome.skipped_optional = skipped_optional_;
  if (terminal_) {
    std::visit([&](auto&& t) { outcome.result = t; }, *terminal_);
  } else {
    outcome.result = Success{tree_};
  }
  return outcome;
}

void Resolver::debug_check() const {
  auto problems = tree_->check_well_formed();
  if (!problems.empty()) throw std::logic_error("tree invariant violated: " + problems.front());
}

ResolutionOutcome resolve(const registry::PackumentSource& store, registry::Selection root,
                          const ResolutionConfig& config) {
  Resolver resolver(store, std::move(root), config);
  return resolver.run();
}

ResolutionOutcome resolve(const registry::PackumentSource& store, const std::string& name,
                          const std::string& range_or_tag, const ResolutionConfig& config) {
  registry::Selection root;
  try {
    root = registry::select_version(store, name, range_or_tag);
  } catch (const Error& err) {
    ResolutionOutcome outcome;
    outcome.result = Unresolvable{err.what()};
    return outcome;
  }
  return resolve(store, std::move(root), config);
}

std::vector<std::string> verify_success_tree(const NodeTree& tree) {
  std::vector<std::string> problems = tree.check_well_formed();
  for (NodeId id : tree.live_nodes()) {
    const auto& n = tree.node(id);
    for (const auto& e : n.edges_out) {
      if (e.status == EdgeStatus::Valid || (e.optional && e.status == EdgeStatus::Missing)) continue;
      problems.push_back(depmodel::to_string(tree.position(id)) + " -> " + e.to_name + " is " +
                         depmodel::to_string(e.status));
    }
    // Peer visibility from every PeerSource of this node.
    for (const auto& e : n.edges_out) {
      if (e.kind != EdgeKind::Regular || e.status != EdgeStatus::Valid) continue;
      for (NodeId peer : valid_peer_closure(tree, e.resolved)) {
        const auto& p = tree.node(peer);
        auto seen = tree.resolve_name(id, p.name);
        // A second copy of the same version in a nearer directory is accepted.
        if (!seen || tree.node(*seen).version != p.version) {
          problems.push_back(depmodel::to_string(tree.position(id)) + " cannot see peer " + p.name + " of " +
                             tree.node(e.resolved).name);
        }
      }
    }
  }
  return problems;
}

}  // namespace peerspin
