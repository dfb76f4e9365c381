#include <algorithm>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "mvrep/geometry.hpp"
#include "mvrep/hpr.hpp"
#include "mvrep/oracles.hpp"

using mvrep::Vec3;

namespace {

std::size_t symmetric_difference(const mvrep::IndexSet& a, const mvrep::IndexSet& b) {
  mvrep::IndexSet out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out.size();
}

std::vector<Vec3> transformed(const std::vector<Vec3>& pts, const Eigen::Affine3d& t) {
  std::vector<Vec3> out;
  for (const Vec3& p : pts) out.push_back(t * p);
  return out;
}

}  // namespace

TEST_CASE("tiny inputs are fully visible") {
  std::vector<Vec3> pts{{1, 2, 3}};
  CHECK(mvrep::hpr::visible_points(pts, Vec3::Zero()) == mvrep::IndexSet{0});
  pts.push_back({-1, 0, 0});
  pts.push_back({2, 2, 2});
  CHECK(mvrep::hpr::visible_points(pts, Vec3::Zero()) == mvrep::IndexSet{0, 1, 2});
  // the third point is directly behind the first, but three points are never culled
  pts[2] = {2, 4, 6};
  CHECK(mvrep::hpr::visible_points(pts, Vec3::Zero()).size() == 3);
}

TEST_CASE("errors") {
  const std::vector<Vec3> none;
  CHECK_THROWS_AS(mvrep::hpr::visible_points(none, Vec3::Zero()), mvrep::GeometryError);
  std::vector<Vec3> pts{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {3e-7, 0, 0}};
  try {
    mvrep::hpr::visible_points(pts, Vec3::Zero());
    FAIL("expected error");
  } catch (const mvrep::GeometryError& e) {
    CHECK(e.index() == 4u);
  }
  pts.pop_back();
  CHECK_THROWS_AS(mvrep::hpr::visible_points(pts, Vec3::Zero(), 0.0), mvrep::ConfigError);
  CHECK_THROWS_AS(mvrep::hpr::visible_points(pts, Vec3::Zero(), -1.0), mvrep::ConfigError);
}

TEST_CASE("near point on a ray hides the far one") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<Vec3> pts{{1, 0, 0}, {2, 0, 0}};
  for (int i = 0; i < 4000; ++i) pts.push_back(Vec3(g(rng), g(rng), g(rng)).normalized() * 5.0);
  const auto vis = mvrep::hpr::visible_points(pts, Vec3::Zero());
  CHECK(std::binary_search(vis.begin(), vis.end(), 0u));
  CHECK_FALSE(std::binary_search(vis.begin(), vis.end(), 1u));

  // R = 100 * 5: the pair flips to 999 and 998, the near point outermost on the shared ray
  const auto flipped = mvrep::spherical_flip(std::vector<Vec3>{pts[0], pts[1]}, Vec3::Zero(), 500.0);
  CHECK(flipped[0].x() == doctest::Approx(999.0));
  CHECK(flipped[1].x() == doctest::Approx(998.0));

  const auto rc = mvrep::oracles::raycast_visibility(pts, Vec3::Zero(), 0.05);
  CHECK(std::binary_search(rc.begin(), rc.end(), 0u));
  CHECK_FALSE(std::binary_search(rc.begin(), rc.end(), 1u));
}

TEST_CASE("sphere cap fixture") {
  const auto fx = mvrep::oracles::cap_visibility_sphere(20000, 1.0, 3.0, 0);
  const auto vis = mvrep::hpr::visible_points(fx.points, fx.viewpoint);
  CHECK(std::is_sorted(vis.begin(), vis.end()));
  CHECK(std::adjacent_find(vis.begin(), vis.end()) == vis.end());
  CHECK(vis.back() < fx.points.size());
  const auto f = mvrep::oracles::f1_score(vis, fx.visible);
  CHECK(f.f1 >= 0.95);
  CHECK(std::abs(static_cast<double>(vis.size()) / 20000.0 - 1.0 / 3.0) <= 0.04);

  const double f10 = mvrep::oracles::f1_score(mvrep::hpr::visible_points(fx.points, fx.viewpoint, 10), fx.visible).f1;
  const double f1000 =
      mvrep::oracles::f1_score(mvrep::hpr::visible_points(fx.points, fx.viewpoint, 1000), fx.visible).f1;
  CHECK(std::abs(f10 - f1000) < 0.05);
}

TEST_CASE("scale invariance") {
  const auto fx = mvrep::oracles::cap_visibility_sphere(5000, 1.0, 3.0, 4);
  const auto base = mvrep::hpr::visible_points(fx.points, fx.viewpoint);
  for (double s : {0.0009765625, 1024.0}) {
    const Eigen::Affine3d t(Eigen::Scaling(s));
    CHECK(mvrep::hpr::visible_points(transformed(fx.points, t), t * fx.viewpoint) == base);
  }
  for (double s : {0.37, 41.0}) {
    const Eigen::Affine3d t(Eigen::Scaling(s));
    const auto vis = mvrep::hpr::visible_points(transformed(fx.points, t), t * fx.viewpoint);
    CHECK(symmetric_difference(vis, base) <= 5);
  }
}

TEST_CASE("rotation invariance") {
  const auto fx = mvrep::oracles::cap_visibility_sphere(20000, 1.0, 3.0, 5);
  const auto base = mvrep::hpr::visible_points(fx.points, fx.viewpoint);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int k = 0; k < 5; ++k) {
    const Eigen::Quaterniond q(Eigen::Vector4d(g(rng), g(rng), g(rng), g(rng)).normalized());
    Eigen::Affine3d t = Eigen::Translation3d(g(rng), g(rng), g(rng)) * q;
    const auto vis = mvrep::hpr::visible_points(transformed(fx.points, t), t * fx.viewpoint);
    CHECK(static_cast<double>(symmetric_difference(vis, base)) <= 0.005 * 20000);
  }
}

TEST_CASE("collinear input takes the jitter retry deterministically") {
  std::vector<Vec3> ray;
  for (int i = 1; i <= 10; ++i) ray.push_back(Vec3(i, i, 0.5 * i));
  const auto a = mvrep::hpr::visible_points(ray, Vec3::Zero(), 100, 42);
  const auto b = mvrep::hpr::visible_points(ray, Vec3::Zero(), 100, 42);
  CHECK(a == b);
  CHECK(std::binary_search(a.begin(), a.end(), 0u));
}

TEST_CASE("occluder in front of a wall") {
  // wall at x = 3, a small box face at x = 1.5 shadows part of it
  std::vector<Vec3> pts;
  for (int i = -40; i <= 40; ++i)
    for (int j = -40; j <= 40; ++j) pts.emplace_back(3.0, i * 0.05, j * 0.05);
  const std::size_t wall = pts.size();
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) pts.emplace_back(1.5, i * 0.02, j * 0.02);
  const auto vis = mvrep::hpr::visible_points(pts, Vec3::Zero());
  const auto rc = mvrep::oracles::raycast_visibility(pts, Vec3::Zero(), mvrep::oracles::spacing_occlusion_radius(pts));
  // the wall point straight behind the occluder is hidden for both
  const std::size_t centre = 40 * 81 + 40;
  CHECK_FALSE(std::binary_search(vis.begin(), vis.end(), centre));
  CHECK_FALSE(std::binary_search(rc.begin(), rc.end(), centre));
  std::size_t occluder_visible = 0;
  for (std::size_t v : vis) occluder_visible += v >= wall;
  CHECK(occluder_visible > 100);
  CHECK(mvrep::oracles::f1_score(vis, rc).f1 > 0.8);
}
