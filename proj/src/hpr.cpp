#include "mvrep/hpr.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mvrep/convex_hull.hpp"
#include "mvrep/geometry.hpp"
#include "mvrep/random.hpp"

namespace mvrep::hpr {

IndexSet visible_points(std::span<const Vec3> points, const Vec3& viewpoint, double radius_factor,
                        std::uint64_t seed) {
  if (points.empty()) throw GeometryError("hidden point removal on an empty point set");
  if (!(radius_factor > 0.0)) throw ConfigError(fmt::format("radius factor must be positive, got {}", radius_factor));

  double max_dist = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - viewpoint).norm();
    if (d <= kEpsDist) throw GeometryError(fmt::format("point {} coincides with the viewpoint", i), i);
    max_dist = std::max(max_dist, d);
  }

  IndexSet visible;
  if (points.size() < 4) {
    for (std::size_t i = 0; i < points.size(); ++i) visible.push_back(i);
    return visible;
  }

  std::vector<Vec3> flipped = spherical_flip(points, viewpoint, radius_factor * max_dist);
  flipped.push_back(viewpoint);

  ConvexHull3 hull;
  try {
    hull = convex_hull_3d(flipped);
  } catch (const DegenerateHullError& first) {
    const Aabb box = bounding_box(flipped);
    const double amplitude = 1e-7 * std::max(box.diagonal(), kEpsDist);
    Rng rng(derive_seed(seed, 0x6870));
    for (Vec3& p : flipped)
      for (int a = 0; a < 3; ++a) p[a] += amplitude * uniform(rng, -1.0, 1.0);
    try {
      hull = convex_hull_3d(flipped);
    } catch (const DegenerateHullError& second) {
      throw GeometryError(fmt::format("flipped point set is degenerate (dimension {}) after jitter retry",
                                      second.dimension()));
    }
  }

  const std::size_t n = points.size();
  for (std::size_t v : hull.vertex_indices)
    if (v < n) visible.push_back(v);
  return visible;
}

IndexSet visible_points(const PointCloud& cloud, const Vec3& viewpoint, double radius_factor, std::uint64_t seed) {
  const auto pts = cloud.positions();
  return visible_points(pts, viewpoint, radius_factor, seed);
}

}  // namespace mvrep::hpr
