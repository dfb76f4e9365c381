#pragma once

#include <array>
#include <span>
#include <vector>

#include "mvrep/types.hpp"

namespace mvrep {

/// Input whose affine hull has dimension < 3 within the hull tolerance.
class DegenerateHullError : public Error {
 public:
  DegenerateHullError(const std::string& what, int dimension) : Error(what), dimension_(dimension) {}
  /// 0: all points coincide, 1: collinear, 2: coplanar.
  int dimension() const noexcept { return dimension_; }

 private:
  int dimension_;
};

struct ConvexHull3 {
  /// Sorted, unique indices of the input points that are hull vertices.
  std::vector<std::size_t> vertex_indices;
  /// Triangles with counter-clockwise winding seen from outside.
  std::vector<std::array<std::size_t, 3>> facets;
  /// Tolerance used during construction (1e-9 times the input bounding-box diagonal).
  double eps = 0.0;
};

/// Relative tolerance applied to the input extent.
inline constexpr double kHullRelativeEps = 1e-9;

/// Quickhull with conflict lists. Requires at least four points; throws DegenerateHullError
/// carrying the detected dimensionality when the input is flat within tolerance.
ConvexHull3 convex_hull_3d(std::span<const Vec3> points);

/// Signed distance of `p` from the plane of facet `f` (positive outside).
double facet_signed_distance(std::span<const Vec3> points, const std::array<std::size_t, 3>& f,
                             const Vec3& p);

}  // namespace mvrep
