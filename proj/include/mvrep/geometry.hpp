#pragma once

#include <span>
#include <vector>

#include "mvrep/types.hpp"

namespace mvrep {

/// View frustum shape: full angular ranges in degrees, depth range in meters.
/// Defaults are the Kinect-class sensor (70 x 60 degrees, 0.5 to 4 m).
struct FovSpec {
  double hfov_deg = 70.0;
  double vfov_deg = 60.0;
  double min_depth = 0.5;
  double max_depth = 4.0;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Camera pose. Right-handed, z up; yaw about +z measured from +x, pitch positive upward.
struct Perspective {
  int id = 0;
  Vec3 viewpoint = Vec3::Zero();
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  FovSpec fov;

  void validate() const;
};

/// Camera-frame axes of a perspective: forward after yaw-then-pitch, lateral to the right, up.
struct CameraBasis {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};

CameraBasis camera_basis(double yaw_deg, double pitch_deg);

/// Precomputed frustum predicate for repeated membership tests against one perspective.
class FrustumTest {
 public:
  explicit FrustumTest(const Perspective& perspective);

  bool contains(const Vec3& point) const {
    const Vec3 q = point - origin_;
    const double d = q.dot(basis_.forward);
    if (d < min_depth_ || d > max_depth_) return false;
    // d > 0 here, so |atan2(x, d)| <= half  <=>  |x| <= d * tan(half).
    return std::abs(q.dot(basis_.right)) <= d * tan_half_h_ &&
           std::abs(q.dot(basis_.up)) <= d * tan_half_v_;
  }

 private:
  Vec3 origin_;
  CameraBasis basis_;
  double min_depth_;
  double max_depth_;
  double tan_half_h_;
  double tan_half_v_;
};

/// True iff `point` lies in the closed frustum of `perspective`.
bool in_frustum(const Vec3& point, const Perspective& perspective);

/// Componentwise min/max over positions. Throws GeometryError on empty input.
Aabb bounding_box(std::span<const Vec3> points);
Aabb bounding_box(const PointCloud& cloud);

/// Distance below which a point is treated as coinciding with a viewpoint.
inline constexpr double kEpsDist = 1e-6;

/// Accepted input distances for spherical_flip. The map is an involution on (0, 2R], but HPR
/// only ever needs inputs inside the sphere.
enum class FlipDomain {
  kInsideSphere,  ///< |p - viewpoint| <= radius
  kInvolution,    ///< |p - viewpoint| <= 2 * radius, so flipped output can be flipped back
};

/// Radial reflection about the sphere of `radius` centred at `viewpoint`:
/// q = p - viewpoint, q' = q * (2 * radius / |q| - 1), output q' + viewpoint.
/// Throws GeometryError if a point is within kEpsDist of the viewpoint or outside `domain`.
std::vector<Vec3> spherical_flip(std::span<const Vec3> points, const Vec3& viewpoint, double radius,
                                 FlipDomain domain = FlipDomain::kInsideSphere);

}  // namespace mvrep
