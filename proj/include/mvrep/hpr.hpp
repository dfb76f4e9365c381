#pragma once

#include <cstdint>
#include <span>

#include "mvrep/types.hpp"

namespace mvrep::hpr {

inline constexpr double kDefaultRadiusFactor = 100.0;

/// Hidden point removal. Points are spherically flipped about `viewpoint` with radius
/// radius_factor * (max distance to the viewpoint); point i is visible iff its flipped image is
/// a vertex of the convex hull of the flipped set plus the viewpoint. Fewer than four points are
/// all visible. A flat flipped set gets one retry with a deterministic jitter of 1e-7 times its
/// extent, seeded by `seed`.
///
/// Returns sorted indices. Throws GeometryError on empty input, on a point within kEpsDist of the
/// viewpoint (carrying its index), or when the retry is still degenerate.
IndexSet visible_points(std::span<const Vec3> points, const Vec3& viewpoint,
                        double radius_factor = kDefaultRadiusFactor, std::uint64_t seed = 0);

IndexSet visible_points(const PointCloud& cloud, const Vec3& viewpoint,
                        double radius_factor = kDefaultRadiusFactor, std::uint64_t seed = 0);

}  // namespace mvrep::hpr
