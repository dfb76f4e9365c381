#pragma once

#include <cstdint>
#include <string>

#include "mvrep/types.hpp"

namespace mvrep::synthetic {

/// Closed box room with a few pieces of furniture, sampled uniformly by surface area.
struct RoomSpec {
  double width = 8.0;   // x extent, meters
  double depth = 6.0;   // y extent
  double height = 3.0;  // z extent
  std::size_t points = 1000000;
  bool furniture = true;
  std::uint64_t seed = 0;
  std::string room_id = "synthetic_room";
};

/// Labelled room cloud (S3DIS category ids). Floor samples under furniture footprints are
/// omitted, as a scanner never sees them.
PointCloud make_room(const RoomSpec& spec);

}  // namespace mvrep::synthetic
