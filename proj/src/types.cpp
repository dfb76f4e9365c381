#include "mvrep/types.hpp"

#include "mvrep/geometry.hpp"

namespace mvrep {

void PointCloud::update_bounds() {
  if (points.empty()) throw GeometryError("point cloud '" + room_id + "' is empty");
  Vec3 lo = points.front().position;
  Vec3 hi = lo;
  for (const Point& p : points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
  bounds = {lo, hi};
}

std::vector<Vec3> PointCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(p.position);
  return out;
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices, std::string id) const {
  PointCloud out;
  out.room_id = std::move(id);
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(points.at(i));
  if (!out.points.empty()) out.update_bounds();
  return out;
}

}  // namespace mvrep
