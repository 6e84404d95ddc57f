#pragma once

// Node-Replacement-Conflict detection. A replacement is risky when, right
// after the swap, a PeerSource's edge to its PeerEntry or the PeerEntry's own
// edge to the swapped package is broken. Risky replacements are counted by
// (name, version, position); a second count at one key reports PeerSpin.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "peerspin/depmodel.hpp"
#include "peerspin/placement.hpp"

namespace peerspin {

enum class PatternHint { A, B, Unknown };

const char* to_string(PatternHint hint) noexcept;

struct PackageRef {
  std::string name;
  semver::Version version;
};

struct ReplacementEvent {
  std::uint64_t seq = 0;
  std::string name;
  semver::Version old_version;
  semver::Version new_version;
  depmodel::TreePosition position;
  bool risky = false;
};

struct PeerSpinReport {
  std::string package;
  /// The two alternating versions, ascending.
  std::vector<semver::Version> versions;
  depmodel::TreePosition position;
  PackageRef peer_source;
  PackageRef peer_entry;
  PatternHint pattern_hint = PatternHint::Unknown;
  std::vector<ReplacementEvent> trace;
  std::uint64_t iterations = 0;
};

struct RiskCheck {
  bool risky = false;
  PatternHint hint = PatternHint::Unknown;
  depmodel::NodeId source = depmodel::kNoNode;
  depmodel::NodeId entry = depmodel::kNoNode;
};

/// Inspects the tree right after `replacement` took its slot (edges already
/// revalidated, nothing pruned yet). Every PeerSet reaching the slot is
/// considered: its entry is the replacement itself or any node with a regular
/// in-edge whose peer closure reaches the slot; its sources are the origins of
/// those regular in-edges.
RiskCheck check_risky(const depmodel::NodeTree& tree, depmodel::NodeId replacement);

class RiskLedger {
 public:
  /// Increments and returns the count for (name, version, position).
  std::uint32_t record_position(const std::string& name, const semver::Version& version,
                                const depmodel::TreePosition& pos);
  std::uint32_t count(const std::string& name, const semver::Version& version,
                      const depmodel::TreePosition& pos) const;

  void append(ReplacementEvent event) { trace_.push_back(std::move(event)); }
  const std::vector<ReplacementEvent>& trace() const noexcept { return trace_; }

 private:
  using Key = std::tuple<std::string, std::string, depmodel::TreePosition>;
  std::map<Key, std::uint32_t> counts_;
  std::vector<ReplacementEvent> trace_;
};

/// Called once per REPLACE. Returns a report when the risky replacement has
/// now happened more than once at the same position.
std::optional<PeerSpinReport> on_replace(const PackageRef& old_node, depmodel::NodeId replacement,
                                         const depmodel::NodeTree& tree, RiskLedger& ledger,
                                         std::uint64_t seq, std::uint64_t iterations);

/// Ground truth used in tests: true iff the log ends with some window of at
/// most `max_window` entries repeated back to back, and that window contains a
/// REPLACE.
bool loop_log_oracle(std::span<const PlacementLogEntry> log, std::size_t max_window);

}  // namespace peerspin
