#pragma once

// Breadth-first resolution: dequeue a node, load the nodes (and PeerSets)
// needed by its broken edges, place each one as shallow as possible, prune
// what the placement broke, and enqueue what changed.

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "peerspin/depmodel.hpp"
#include "peerspin/detector.hpp"
#include "peerspin/placement.hpp"
#include "peerspin/registry.hpp"

namespace peerspin {

struct ResolutionConfig {
  /// Queue pops allowed before giving up.
  std::uint64_t max_iterations = 10000;
  bool detector_enabled = true;
  /// Callers use this to decide whether to persist the placement log; the log
  /// itself is always recorded.
  bool emit_placement_log = false;
  /// Verify tree well-formedness after every placement (throws on violation).
  bool debug_checks = false;
};

struct Success {
  std::shared_ptr<const depmodel::NodeTree> tree;
};
struct PeerSpin {
  PeerSpinReport report;
};
struct Unresolvable {
  std::string diagnostic;
};
struct IterationLimitExceeded {
  std::vector<PlacementLogEntry> tail;
};

enum class Verdict { Clean, PeerSpin, Unresolvable, IterationLimit };

const char* to_string(Verdict verdict) noexcept;

struct ResolutionOutcome {
  std::variant<Success, PeerSpin, Unresolvable, IterationLimitExceeded> result;
  std::vector<PlacementLogEntry> log;
  std::uint64_t iterations = 0;
  /// Optional peers that were left unresolved ("skipped-optional").
  std::vector<std::string> skipped_optional;

  Verdict verdict() const noexcept;
};

/// Unit of work handed to can_place/place: one package version plus the
/// requirement it has to meet and, for a PeerEntry, its PeerSet.
struct Candidate {
  registry::Selection selection;
  const semver::VersionRange* req = nullptr;
  const depmodel::PeerSet* peer_set = nullptr;

  const std::string& name() const { return selection.manifest->name; }
  const semver::Version& version() const { return selection.manifest->version; }
};

struct PlaceResult {
  PlacementType type = PlacementType::Conflict;
  /// The node now holding the slot (new node, or incumbent on KEEP).
  depmodel::NodeId node = depmodel::kNoNode;
  std::optional<PeerSpinReport> report;
};

struct LoadedGroup {
  std::size_t edge_index = 0;
  /// Directory where placement of the entry starts.
  depmodel::NodeId start = depmodel::kNoNode;
  depmodel::PeerSet peer_set;
};

class Resolver {
 public:
  Resolver(const registry::PackumentSource& store, registry::Selection root, ResolutionConfig config = {});

  /// Runs to completion.
  ResolutionOutcome run();

  // Individual steps, public so tests can drive them.

  /// Loads one group per non-valid, non-optional edge of `current`, against the
  /// current tree. Throws peerspin::Error when a requirement cannot be met.
  std::vector<LoadedGroup> load_nodes(depmodel::NodeId current) const;
  LoadedGroup load_group(depmodel::NodeId current, std::size_t edge_index) const;

  PlacementType can_place(const Candidate& n, depmodel::NodeId pos, depmodel::NodeId start) const;

  /// Ascends from `start` while can_place is not CONFLICT and applies the last
  /// non-conflicting placement. ADD/REPLACE are followed by prune().
  PlaceResult place(const Candidate& n, depmodel::NodeId start);

  /// Removes nodes whose peer contract broke and nodes no longer reachable
  /// through edges from the root. Returns removed ids. Sources of edges left
  /// non-valid are collected into the pending-invalidated set.
  std::vector<depmodel::NodeId> prune(std::vector<depmodel::NodeTree::EdgeChange> changes);

  void update_queue(const std::vector<depmodel::NodeId>& placed, const std::set<depmodel::NodeId>& invalidated);

  /// Pops one node and processes it. Returns false once the queue is empty or
  /// a terminal outcome was reached.
  bool step();

  const depmodel::NodeTree& tree() const noexcept { return *tree_; }
  const std::deque<depmodel::NodeId>& queue() const noexcept { return queue_; }
  const std::vector<PlacementLogEntry>& log() const noexcept { return log_; }
  const RiskLedger& ledger() const noexcept { return ledger_; }
  /// Nodes collected by prune() for re-enqueueing at the end of the current step.
  const std::set<depmodel::NodeId>& invalidated() const noexcept { return invalidated_; }
  std::uint64_t iterations() const noexcept { return iterations_; }

 private:
  void log_placement(PlacementType type, const std::string& name, const semver::Version& v,
                     depmodel::TreePosition pos);
  bool shadows_visible_peer(const std::string& name, depmodel::NodeId pos) const;
  void debug_check() const;

  const registry::PackumentSource* store_;
  ResolutionConfig config_;
  std::shared_ptr<depmodel::NodeTree> tree_;
  std::deque<depmodel::NodeId> queue_;
  std::set<depmodel::NodeId> pending_;
  std::set<depmodel::NodeId> invalidated_;
  std::vector<PlacementLogEntry> log_;
  RiskLedger ledger_;
  std::uint64_t iterations_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<std::string> skipped_optional_;
  std::optional<std::variant<PeerSpin, Unresolvable, IterationLimitExceeded>> terminal_;
};

ResolutionOutcome resolve(const registry::PackumentSource& store, registry::Selection root,
                          const ResolutionConfig& config = {});

/// Selects the root from the store first; a missing package or version yields
/// an Unresolvable outcome.
ResolutionOutcome resolve(const registry::PackumentSource& store, const std::string& name,
                          const std::string& range_or_tag, const ResolutionConfig& config = {});

/// Full rescan used to validate Success trees: every non-optional edge valid,
/// and every peer reachable from an entry visible from the entry's sources
/// (the source resolves the peer's name to the same version).
/// Returns one message per violation.
std::vector<std::string> verify_success_tree(const depmodel::NodeTree& tree);

}  // namespace peerspin
