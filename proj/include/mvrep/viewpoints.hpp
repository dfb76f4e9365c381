#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvrep/geometry.hpp"

namespace mvrep {

struct GridConfig {
  double spacing = 4.0;
  double camera_height = 1.5;
  std::vector<double> yaw_steps{0, 45, 90, 135, 180, 225, 270, 315};
  std::vector<double> pitch_steps{-30, 0, 30};
  bool include_boundary = true;

  void validate() const;
};

/// Gridline positions along one axis: lo + k * spacing up to hi, plus hi itself when it is not
/// already hit. Without boundary lines only the strictly interior ones remain (the midpoint when
/// none fit).
std::vector<double> gridlines(double lo, double hi, double spacing, bool include_boundary);

/// Viewpoints at gridline intersections over the horizontal extent of `bounds`, at height
/// bounds.min.z + camera_height, ordered by x then y. A box with no horizontal extent yields the
/// single centroid viewpoint.
std::vector<Vec3> grid_viewpoints(const Aabb& bounds, const GridConfig& config);

/// viewpoints x yaw_steps x pitch_steps in that nesting order; id = position in the sequence.
std::vector<Perspective> enumerate_perspectives(std::span<const Vec3> viewpoints, const GridConfig& config,
                                                const FovSpec& fov);

struct CoverageEstimate {
  std::size_t samples = 0;    // points tested (those at least min_depth from every viewpoint)
  std::size_t uncovered = 0;  // tested points outside every frustum
  double uncovered_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(uncovered) / static_cast<double>(samples);
  }
};

/// Monte-Carlo check that the perspectives' frustums cover the volume of `bounds`.
CoverageEstimate estimate_coverage(const Aabb& bounds, std::span<const Perspective> perspectives,
                                   std::size_t samples, std::uint64_t seed);

}  // namespace mvrep
