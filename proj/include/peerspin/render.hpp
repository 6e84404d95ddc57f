#pragma once

// Text renderings of outcomes, reports and placement logs. Output is
// deterministic: children and edges are sorted by name.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "peerspin/resolver.hpp"

namespace peerspin::render {

enum class Format { Json, TreeText, Ndjson };

std::optional<Format> parse_format(std::string_view text);

/// {package, versions, position, peerSource, peerEntry, patternHint, iterations, trace}
std::string report_json(const PeerSpinReport& report, bool pretty = false);

/// Success renders the tree; any other outcome renders its verdict payload
/// (a PeerSpin outcome renders the report, never a partial tree). With
/// `include_tree` false a Success renders only its verdict line/object.
std::string outcome(const ResolutionOutcome& outcome, Format format, bool include_tree = true);

/// One {seq, action, name, version, position} line per entry.
std::string placement_log_ndjson(std::span<const PlacementLogEntry> log);

}  // namespace peerspin::render
