#pragma once

#include <cstdint>
#include <string>

#include "peerspin/depmodel.hpp"
#include "peerspin/semver.hpp"

namespace peerspin {

enum class PlacementType { Add, Keep, Replace, Conflict };

const char* to_string(PlacementType type) noexcept;

struct PlacementLogEntry {
  std::uint64_t seq = 0;
  PlacementType action = PlacementType::Add;
  std::string name;
  semver::Version version;
  depmodel::TreePosition position;
};

/// Equality on (action, name, version, position); seq is ignored.
bool same_placement(const PlacementLogEntry& a, const PlacementLogEntry& b);

}  // namespace peerspin
