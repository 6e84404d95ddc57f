#pragma once

#include <json.hpp>

#include "peerspin/detector.hpp"
#include "peerspin/placement.hpp"

namespace peerspin::detail {

nlohmann::ordered_json report_to_json(const PeerSpinReport& report);
nlohmann::ordered_json log_entry_to_json(const PlacementLogEntry& entry);
/// Inverse of report_to_json; throws nlohmann::json exceptions or peerspin::Error on bad input.
PeerSpinReport report_from_json(const nlohmann::json& j);

}  // namespace peerspin::detail
