#include "mvrep/viewpoints.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mvrep/random.hpp"

namespace mvrep {

void GridConfig::validate() const {
  if (!(spacing > 0.0)) throw ConfigError(fmt::format("grid spacing must be positive, got {}", spacing));
  if (!std::isfinite(camera_height)) throw ConfigError("camera height must be finite");
  if (yaw_steps.empty()) throw ConfigError("yaw steps must not be empty");
  if (pitch_steps.empty()) throw ConfigError("pitch steps must not be empty");
  for (double y : yaw_steps)
    if (!(y >= 0.0 && y < 360.0)) throw ConfigError(fmt::format("yaw step {} outside [0, 360)", y));
  for (double p : pitch_steps)
    if (!(p >= -90.0 && p <= 90.0)) throw ConfigError(fmt::format("pitch step {} outside [-90, 90]", p));
}

std::vector<double> gridlines(double lo, double hi, double spacing, bool include_boundary) {
  const double tol = 1e-9 * std::max(1.0, hi - lo);
  std::vector<double> lines;
  for (long k = 0;; ++k) {
    const double x = lo + static_cast<double>(k) * spacing;
    if (x > hi + tol) break;
    lines.push_back(x);
  }
  if (lines.back() < hi - tol) lines.push_back(hi);
  if (!include_boundary) {
    std::vector<double> interior;
    for (double x : lines)
      if (x > lo + tol && x < hi - tol) interior.push_back(x);
    if (interior.empty()) interior.push_back(0.5 * (lo + hi));
    return interior;
  }
  return lines;
}

std::vector<Vec3> grid_viewpoints(const Aabb& bounds, const GridConfig& config) {
  config.validate();
  const double z = bounds.min.z() + config.camera_height;
  const Vec3 ext = bounds.extent();
  const double tol = 1e-9 * std::max(1.0, ext.head<2>().norm());
  if (ext.x() <= tol || ext.y() <= tol) {
    const Vec3 c = bounds.center();
    return {Vec3(c.x(), c.y(), z)};
  }
  const auto xs = gridlines(bounds.min.x(), bounds.max.x(), config.spacing, config.include_boundary);
  const auto ys = gridlines(bounds.min.y(), bounds.max.y(), config.spacing, config.include_boundary);
  std::vector<Vec3> out;
  out.reserve(xs.size() * ys.size());
  for (double x : xs)
    for (double y : ys) out.emplace_back(x, y, z);
  return out;
}

std::vector<Perspective> enumerate_perspectives(std::span<const Vec3> viewpoints, const GridConfig& config,
                                                const FovSpec& fov) {
  config.validate();
  fov.validate();
  std::vector<Perspective> out;
  out.reserve(viewpoints.size() * config.yaw_steps.size() * config.pitch_steps.size());
  int id = 0;
  for (const Vec3& v : viewpoints)
    for (double yaw : config.yaw_steps)
      for (double pitch : config.pitch_steps) {
        Perspective p;
        p.id = id++;
        p.viewpoint = v;
        p.yaw_deg = yaw;
        p.pitch_deg = pitch;
        p.fov = fov;
        out.push_back(p);
      }
  return out;
}

CoverageEstimate estimate_coverage(const Aabb& bounds, std::span<const Perspective> perspectives,
                                   std::size_t samples, std::uint64_t seed) {
  std::vector<FrustumTest> tests;
  tests.reserve(perspectives.size());
  for (const Perspective& p : perspectives) tests.emplace_back(p);
  Rng rng(derive_seed(seed, 0xc0));
  CoverageEstimate est;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec3 x;
    for (int a = 0; a < 3; ++a) x[a] = uniform(rng, bounds.min[a], bounds.max[a]);
    bool near_viewpoint = false;
    for (const Perspective& p : perspectives)
      if ((x - p.viewpoint).norm() < p.fov.min_depth) {
        near_viewpoint = true;
        break;
      }
    if (near_viewpoint) continue;
    ++est.samples;
    bool covered = false;
    for (const FrustumTest& t : tests)
      if (t.contains(x)) {
        covered = true;
        break;
      }
    if (!covered) ++est.uncovered;
  }
  return est;
}

}  // namespace mvrep
