#include "mvrep/geometry.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace mvrep {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void FovSpec::validate() const {
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0))
    throw ConfigError(fmt::format("hfov must be in (0, 180) degrees, got {}", hfov_deg));
  if (!(vfov_deg > 0.0 && vfov_deg < 180.0))
    throw ConfigError(fmt::format("vfov must be in (0, 180) degrees, got {}", vfov_deg));
  if (!(min_depth > 0.0 && min_depth < max_depth))
    throw ConfigError(
        fmt::format("depth range requires 0 < min-depth < max-depth, got {} .. {}", min_depth, max_depth));
}

void Perspective::validate() const {
  fov.validate();
  if (!viewpoint.allFinite()) throw ConfigError("viewpoint must be finite");
  if (!(yaw_deg >= 0.0 && yaw_deg < 360.0))
    throw ConfigError(fmt::format("yaw must be in [0, 360), got {}", yaw_deg));
  if (!(pitch_deg >= -90.0 && pitch_deg <= 90.0))
    throw ConfigError(fmt::format("pitch must be in [-90, 90], got {}", pitch_deg));
}

CameraBasis camera_basis(double yaw_deg, double pitch_deg) {
  const double cy = std::cos(radians(yaw_deg));
  const double sy = std::sin(radians(yaw_deg));
  const double cp = std::cos(radians(pitch_deg));
  const double sp = std::sin(radians(pitch_deg));
  return {
      Vec3(cp * cy, cp * sy, sp),
      Vec3(sy, -cy, 0.0),
      Vec3(-sp * cy, -sp * sy, cp),
  };
}

FrustumTest::FrustumTest(const Perspective& perspective)
    : origin_(perspective.viewpoint),
      basis_(camera_basis(perspective.yaw_deg, perspective.pitch_deg)),
      min_depth_(perspective.fov.min_depth),
      max_depth_(perspective.fov.max_depth),
      tan_half_h_(std::tan(radians(perspective.fov.hfov_deg) / 2.0)),
      tan_half_v_(std::tan(radians(perspective.fov.vfov_deg) / 2.0)) {}

bool in_frustum(const Vec3& point, const Perspective& perspective) {
  return FrustumTest(perspective).contains(point);
}

Aabb bounding_box(std::span<const Vec3> points) {
  if (points.empty()) throw GeometryError("bounding box of an empty point set");
  Aabb box{points.front(), points.front()};
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

Aabb bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) throw GeometryError("bounding box of an empty point cloud");
  Aabb box{cloud.points.front().position, cloud.points.front().position};
  for (const Point& p : cloud.points) {
    box.min = box.min.cwiseMin(p.position);
    box.max = box.max.cwiseMax(p.position);
  }
  return box;
}

std::vector<Vec3> spherical_flip(std::span<const Vec3> points, const Vec3& viewpoint, double radius,
                                 FlipDomain domain) {
  const double limit = domain == FlipDomain::kInsideSphere ? radius : 2.0 * radius;
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 q = points[i] - viewpoint;
    const double norm = q.norm();
    if (norm <= kEpsDist)
      throw GeometryError(fmt::format("point {} coincides with the viewpoint", i), i);
    if (norm > limit)
      throw GeometryError(
          fmt::format("flip radius {} is too small for the distance {} of point {}", radius, norm, i), i);
    out.push_back(viewpoint + q * (2.0 * radius / norm - 1.0));
  }
  return out;
}

}  // namespace mvrep
