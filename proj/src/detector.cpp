#include "peerspin/detector.hpp"

#include <algorithm>
#include <set>

namespace peerspin {

using depmodel::EdgeKind;
using depmodel::EdgeStatus;
using depmodel::NodeId;
using depmodel::NodeTree;

const char* to_string(PatternHint hint) noexcept {
  switch (hint) {
    case PatternHint::A: return "A";
    case PatternHint::B: return "B";
    case PatternHint::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

// Nodes reachable from `start` through resolved peer edges (any status),
// including `start` itself, in breadth-first order.
std::vector<NodeId> peer_closure(const NodeTree& tree, NodeId start) {
  std::vector<NodeId> order{start};
  std::set<NodeId> seen{start};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& e : tree.node(order[i]).edges_out) {
      if (e.kind != EdgeKind::Peer || e.resolved == depmodel::kNoNode) continue;
      if (seen.insert(e.resolved).second) order.push_back(e.resolved);
    }
  }
  return order;
}

bool broken(const depmodel::Edge& e) {
  return e.status != EdgeStatus::Valid && !(e.optional && e.status == EdgeStatus::Missing);
}

}  // namespace

RiskCheck check_risky(const NodeTree& tree, NodeId replacement) {
  const auto& swapped = tree.node(replacement).name;
  for (NodeId entry : tree.live_nodes()) {
    auto closure = peer_closure(tree, entry);
    if (std::find(closure.begin(), closure.end(), replacement) == closure.end()) continue;
    auto sources = tree.in_edges(entry);
    std::erase_if(sources, [&](const depmodel::EdgeRef& ref) { return tree.edge(ref).kind != EdgeKind::Regular; });
    if (sources.empty()) continue;

    for (const auto& ref : sources) {
      if (tree.edge(ref).status != EdgeStatus::Valid) return {true, PatternHint::A, ref.from, entry};
    }
    // The entry's own requirement on the swapped name, or one made by a peer
    // it pulls in, no longer holds.
    for (NodeId member : closure) {
      for (const auto& e : tree.node(member).edges_out) {
        if (member != entry && e.kind != EdgeKind::Peer) continue;
        if (e.to_name == swapped && broken(e)) return {true, PatternHint::B, sources.front().from, entry};
      }
    }
  }
  return {};
}

std::uint32_t RiskLedger::record_position(const std::string& name, const semver::Version& version,
                                          const depmodel::TreePosition& pos) {
  return ++counts_[Key{name, registry::version_key(version), pos}];
}

std::uint32_t RiskLedger::count(const std::string& name, const semver::Version& version,
                                const depmodel::TreePosition& pos) const {
  auto it = counts_.find(Key{name, registry::version_key(version), pos});
  return it == counts_.end() ? 0 : it->second;
}

std::optional<PeerSpinReport> on_replace(const PackageRef& old_node, NodeId replacement, const NodeTree& tree,
                                         RiskLedger& ledger, std::uint64_t seq, std::uint64_t iterations) {
  const auto& fresh = tree.node(replacement);
  auto check = check_risky(tree, replacement);
  auto pos = tree.position(replacement);
  ledger.append({seq, fresh.name, old_node.version, fresh.version, pos, check.risky});
  if (!check.risky) return std::nullopt;
  if (ledger.record_position(fresh.name, fresh.version, pos) <= 1) return std::nullopt;

  PeerSpinReport report;
  report.package = fresh.name;
  report.versions = {old_node.version, fresh.version};
  std::sort(report.versions.begin(), report.versions.end());
  report.position = std::move(pos);
  const auto& source = tree.node(check.source);
  const auto& entry = tree.node(check.entry);
  report.peer_source = {source.name, source.version};
  report.peer_entry = {entry.name, entry.version};
  report.pattern_hint = check.hint;
  report.trace = ledger.trace();
  report.iterations = iterations;
  return report;
}

bool loop_log_oracle(std::span<const PlacementLogEntry> log, std::size_t max_window) {
  const std::size_t n = log.size();
  for (std::size_t w = 1; w <= max_window && 2 * w <= n; ++w) {
    bool repeated = true;
    for (std::size_t i = 0; i < w && repeated; ++i) {
      repeated = same_placement(log[n - w + i], log[n - 2 * w + i]);
    }
    if (!repeated) continue;
    bool has_replace = std::any_of(log.end() - static_cast<std::ptrdiff_t>(w), log.end(),
                                   [](const PlacementLogEntry& e) { return e.action == PlacementType::Replace; });
    if (has_replace) return true;
  }
  return false;
}

}  // namespace peerspin
