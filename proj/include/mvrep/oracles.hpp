#pragma once

// Brute-force references for tests and the acceptance suite. Nothing here calls the hull,
// HPR, or critical-set code it is used to check.

#include <cstdint>
#include <vector>

#include "mvrep/critical.hpp"
#include "mvrep/types.hpp"

namespace mvrep::oracles {

/// Per-point unit normals from PCA over the `k` nearest neighbours.
std::vector<Vec3> estimate_normals(std::span<const Vec3> points, std::size_t k = 12);

/// Median distance from each point to its nearest other point.
double median_nn_spacing(std::span<const Vec3> points);

/// Occlusion radius matched to the sample density: 3 x median_nn_spacing.
double spacing_occlusion_radius(std::span<const Vec3> points);

/// Line-of-sight visibility on a point sample. Point p is hidden iff some other point q with
/// |q - viewpoint| < |p - viewpoint| lies within `occlusion_radius` of the segment viewpoint->p
/// and is off p's local tangent plane by more than `occlusion_radius`. Neighbours on p's own
/// surface patch never occlude p; without that exclusion every sample would be hidden by its
/// closer neighbours. Grid-accelerated; equal to raycast_visibility_bruteforce.
IndexSet raycast_visibility(std::span<const Vec3> points, const Vec3& viewpoint, double occlusion_radius);
IndexSet raycast_visibility(const PointCloud& cloud, const Vec3& viewpoint, double occlusion_radius);

/// Same predicate by exhaustive O(n^2) search.
IndexSet raycast_visibility_bruteforce(std::span<const Vec3> points, const Vec3& viewpoint,
                                       double occlusion_radius);

struct CapFixture {
  std::vector<Vec3> points;
  Vec3 viewpoint;
  IndexSet visible;
  double sphere_radius;
};

/// Seeded uniform sample of the sphere of `sphere_radius` about the origin, viewed from
/// (0, 0, view_distance). A point is visible iff cos(theta) >= sphere_radius / view_distance,
/// theta being its angle from the viewing axis at the centre.
CapFixture cap_visibility_sphere(std::size_t n, double sphere_radius, double view_distance,
                                 std::uint64_t seed = 0);

/// Hull vertices by testing every point triple as a supporting plane. 4 <= n <= 30;
/// throws GeometryError on degenerate (coplanar supporting) input.
IndexSet hull_bruteforce(std::span<const Vec3> points);

struct MaxpoolEnumeration {
  critical::Embedding u;
  std::vector<IndexSet> minimal_sets;  // each sorted; list sorted lexicographically
};

/// Enumerates all subsets (n <= 15) and returns u(S) with every inclusion-minimal T, u(T) = u(S).
MaxpoolEnumeration maxpool_bruteforce(const PointCloud& cloud, const critical::FeatureBank& bank);

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

F1Score f1_score(const IndexSet& predicted, const IndexSet& truth);

}  // namespace mvrep::oracles
