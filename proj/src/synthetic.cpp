#include "mvrep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvrep/io.hpp"
#include "mvrep/random.hpp"

namespace mvrep::synthetic {

namespace {

struct Rect {
  Vec3 origin;
  Vec3 u;  // edge vectors
  Vec3 v;
  int label;
  Color color;
  double area() const { return u.cross(v).norm(); }
};

struct Footprint {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
};

// Top and four sides of an axis-aligned box standing on the floor.
void add_box(std::vector<Rect>& rects, std::vector<Footprint>& feet, Vec3 lo, Vec3 size, int label, Color c) {
  const Vec3 X(size.x(), 0, 0), Y(0, size.y(), 0), Z(0, 0, size.z());
  rects.push_back({lo + Z, X, Y, label, c});
  rects.push_back({lo, X, Z, label, c});
  rects.push_back({lo + Y, X, Z, label, c});
  rects.push_back({lo, Y, Z, label, c});
  rects.push_back({lo + X, Y, Z, label, c});
  feet.push_back({lo.x(), lo.y(), lo.x() + size.x(), lo.y() + size.y()});
}

}  // namespace

PointCloud make_room(const RoomSpec& spec) {
  const double W = spec.width, D = spec.depth, H = spec.height;
  const int ceiling = io::s3dis_category_id("ceiling"), floor = io::s3dis_category_id("floor"),
            wall = io::s3dis_category_id("wall");
  std::vector<Rect> rects{
      {{0, 0, 0}, {W, 0, 0}, {0, D, 0}, floor, {140, 130, 120}},
      {{0, 0, H}, {W, 0, 0}, {0, D, 0}, ceiling, {230, 230, 225}},
      {{0, 0, 0}, {W, 0, 0}, {0, 0, H}, wall, {200, 190, 170}},
      {{0, D, 0}, {W, 0, 0}, {0, 0, H}, wall, {200, 190, 170}},
      {{0, 0, 0}, {0, D, 0}, {0, 0, H}, wall, {190, 200, 170}},
      {{W, 0, 0}, {0, D, 0}, {0, 0, H}, wall, {190, 200, 170}},
  };
  std::vector<Footprint> feet;
  if (spec.furniture) {
    // Positions scale with the room so any size stays furnished and inside the walls.
    add_box(rects, feet, {0.30 * W, 0.35 * D, 0}, {0.20 * W, 0.15 * D, 0.75}, io::s3dis_category_id("table"),
            {150, 100, 60});
    add_box(rects, feet, {0.30 * W, 0.22 * D, 0}, {0.06 * W, 0.08 * D, 0.9}, io::s3dis_category_id("chair"),
            {60, 60, 160});
    add_box(rects, feet, {0.92 * W, 0.20 * D, 0}, {0.05 * W, 0.25 * D, std::min(2.0, 0.7 * H)},
            io::s3dis_category_id("bookcase"), {120, 80, 40});
    add_box(rects, feet, {0.10 * W, 0.80 * D, 0}, {0.25 * W, 0.12 * D, 0.8}, io::s3dis_category_id("sofa"),
            {90, 140, 90});
  }

  std::vector<double> cumulative;
  double total = 0.0;
  for (const Rect& r : rects) cumulative.push_back(total += r.area());

  Rng rng(derive_seed(spec.seed, 0x726f6f6d));
  PointCloud cloud;
  cloud.room_id = spec.room_id;
  cloud.points.reserve(spec.points);
  while (cloud.points.size() < spec.points) {
    const double pick = uniform01(rng) * total;
    const std::size_t k = static_cast<std::size_t>(
        std::min<long>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(),
                       static_cast<long>(rects.size()) - 1));
    const Rect& r = rects[k];
    const Vec3 pos = r.origin + uniform01(rng) * r.u + uniform01(rng) * r.v;
    if (r.label == floor &&
        std::any_of(feet.begin(), feet.end(), [&](const Footprint& f) { return f.contains(pos.x(), pos.y()); }))
      continue;
    auto jitter = [&](std::uint8_t c) {
      return static_cast<std::uint8_t>(std::clamp<long>(c + static_cast<long>(uniform_index(rng, 21)) - 10, 0, 255));
    };
    Point p;
    p.position = pos;
    p.color = {jitter(r.color.r), jitter(r.color.g), jitter(r.color.b)};
    p.label = r.label;
    cloud.points.push_back(p);
  }
  cloud.update_bounds();
  return cloud;
}

}  // namespace mvrep::synthetic
