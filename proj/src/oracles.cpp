#include "mvrep/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "mvrep/random.hpp"

namespace mvrep::oracles {

namespace {

// Dense uniform grid over a point set, points bucketed in CSR order.
class UniformGrid {
 public:
  UniformGrid(std::span<const Vec3> points, double cell) : points_(points) {
    lo_ = points.front();
    Vec3 hi = lo_;
    for (const Vec3& p : points) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 ext = hi - lo_;
    // Cap the cell count so degenerate extents cannot blow up memory.
    cell_ = std::max(cell, 1e-12);
    const double max_cells = 64.0 * 1024 * 1024;
    while ((std::floor(ext.x() / cell_) + 1) * (std::floor(ext.y() / cell_) + 1) *
               (std::floor(ext.z() / cell_) + 1) >
           max_cells)
      cell_ *= 1.5;
    for (int a = 0; a < 3; ++a) dims_[a] = static_cast<long>(std::floor(ext[a] / cell_)) + 1;
    const std::size_t total = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
    start_.assign(total + 1, 0);
    std::vector<std::size_t> key(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      key[i] = flat(cell_of(points[i]));
      ++start_[key[i] + 1];
    }
    for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    items_.resize(points.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) items_[fill[key[i]]++] = i;
  }

  double cell() const { return cell_; }

  std::array<long, 3> cell_of(const Vec3& p) const {
    std::array<long, 3> c;
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp(static_cast<long>(std::floor((p[a] - lo_[a]) / cell_)), 0L, dims_[a] - 1);
    return c;
  }

  template <typename F>
  void for_each_in_box(const std::array<long, 3>& lo, const std::array<long, 3>& hi, F&& fn) const {
    for (long x = std::max(lo[0], 0L); x <= std::min(hi[0], dims_[0] - 1); ++x)
      for (long y = std::max(lo[1], 0L); y <= std::min(hi[1], dims_[1] - 1); ++y)
        for (long z = std::max(lo[2], 0L); z <= std::min(hi[2], dims_[2] - 1); ++z) {
          const std::size_t c = flat({x, y, z});
          for (std::size_t k = start_[c]; k < start_[c + 1]; ++k)
            if (!fn(items_[k])) return;
        }
  }

  /// k nearest neighbours of point i (excluding i), nearest first.
  std::vector<std::size_t> knn(std::size_t i, std::size_t k) const {
    const Vec3& p = points_[i];
    const auto c = cell_of(p);
    std::vector<std::pair<double, std::size_t>> cand;
    const long max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (long ring = 1; ring <= max_ring; ++ring) {
      cand.clear();
      for_each_in_box({c[0] - ring, c[1] - ring, c[2] - ring}, {c[0] + ring, c[1] + ring, c[2] + ring},
                      [&](std::size_t j) {
                        if (j != i) cand.emplace_back((points_[j] - p).squaredNorm(), j);
                        return true;
                      });
      if (cand.size() < k && ring < max_ring) continue;
      const std::size_t m = std::min(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(m), cand.end());
      // Everything within `ring` cells is guaranteed seen.
      const double safe = static_cast<double>(ring) * cell_;
      if (m == k && cand[m - 1].first > safe * safe && ring < max_ring) continue;
      std::vector<std::size_t> out;
      for (std::size_t t = 0; t < m; ++t) out.push_back(cand[t].second);
      return out;
    }
    return {};
  }

 private:
  std::size_t flat(const std::array<long, 3>& c) const {
    return static_cast<std::size_t>((c[0] * dims_[1] + c[1]) * dims_[2] + c[2]);
  }

  std::span<const Vec3> points_;
  Vec3 lo_;
  double cell_ = 1.0;
  std::array<long, 3> dims_{1, 1, 1};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

// Cell size giving a handful of points per cell on surface-like samples.
double surface_cell_size(std::span<const Vec3> points) {
  Vec3 lo = points.front(), hi = lo;
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 e = hi - lo;
  const double area = 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  const double diag = e.norm();
  if (diag == 0.0) return 1.0;
  const double h = 2.0 * std::sqrt(std::max(area, diag * diag * 1e-6) / static_cast<double>(points.size()));
  return std::max(h, diag * 1e-6);
}

double segment_distance(const Vec3& q, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (q - (a + t * ab)).norm();
}

// Samples on p's tangent plane within this many occlusion radii of p never occlude it. Past
// that, an in-plane ray (grazing below about asin(1 / kSelfReach)) is blocked by the surface.
constexpr double kSelfReach = 10.0;

bool occludes(const Vec3& q, const Vec3& p, const Vec3& normal_p, const Vec3& vp, double dist_p, double r) {
  if ((q - vp).norm() >= dist_p) return false;
  if (std::abs(normal_p.dot(q - p)) <= r && (q - p).squaredNorm() <= kSelfReach * kSelfReach * r * r) return false;
  return segment_distance(q, vp, p) < r;
}

void check_radius(double r) {
  if (!(r > 0.0)) throw ConfigError(fmt::format("occlusion radius must be positive, got {}", r));
}

}  // namespace

std::vector<Vec3> estimate_normals(std::span<const Vec3> points, std::size_t k) {
  std::vector<Vec3> normals(points.size(), Vec3::UnitZ());
  if (points.size() < 3) return normals;
  UniformGrid grid(points, surface_cell_size(points));
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto nbrs = grid.knn(i, k);
    nbrs.push_back(i);
    Vec3 mean = Vec3::Zero();
    for (std::size_t j : nbrs) mean += points[j];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t j : nbrs) {
      const Vec3 d = points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    normals[i] = solver.eigenvectors().col(0).normalized();
  }
  return normals;
}

double median_nn_spacing(std::span<const Vec3> points) {
  if (points.size() < 2) return 0.0;
  UniformGrid grid(points, surface_cell_size(points));
  std::vector<double> d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = grid.knn(i, 1);
    d[i] = (points[nn.front()] - points[i]).norm();
  }
  const auto mid = d.begin() + static_cast<long>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double spacing_occlusion_radius(std::span<const Vec3> points) { return 3.0 * median_nn_spacing(points); }

IndexSet raycast_visibility(std::span<const Vec3> points, const Vec3& viewpoint, double occlusion_radius) {
  check_radius(occlusion_radius);
  IndexSet visible;
  if (points.empty()) return visible;
  const auto normals = estimate_normals(points);
  const double cell = std::max(2.0 * occlusion_radius, surface_cell_size(points) * 0.5);
  UniformGrid grid(points, cell);
  const double c = grid.cell();
  // Samples spaced one cell apart keep every point within r of the segment inside the
  // 27-cell neighbourhood of some sample, because r + c/2 <= c.
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    const double dist = (p - viewpoint).norm();
    const int steps = static_cast<int>(std::ceil(dist / c));
    bool hidden = false;
    std::array<long, 3> prev{-1, -1, -1};
    for (int s = 0; s <= steps && !hidden; ++s) {
      const Vec3 x = viewpoint + (p - viewpoint) * (static_cast<double>(s) / std::max(steps, 1));
      const auto cc = grid.cell_of(x);
      if (cc == prev) continue;
      prev = cc;
      grid.for_each_in_box({cc[0] - 1, cc[1] - 1, cc[2] - 1}, {cc[0] + 1, cc[1] + 1, cc[2] + 1},
                           [&](std::size_t j) {
                             if (j != i && occludes(points[j], p, normals[i], viewpoint, dist, occlusion_radius)) {
                               hidden = true;
                               return false;
                             }
                             return true;
                           });
    }
    if (!hidden) visible.push_back(i);
  }
  return visible;
}

IndexSet raycast_visibility(const PointCloud& cloud, const Vec3& viewpoint, double occlusion_radius) {
  const auto pts = cloud.positions();
  return raycast_visibility(pts, viewpoint, occlusion_radius);
}

IndexSet raycast_visibility_bruteforce(std::span<const Vec3> points, const Vec3& viewpoint,
                                       double occlusion_radius) {
  check_radius(occlusion_radius);
  const auto normals = estimate_normals(points);
  IndexSet visible;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dist = (points[i] - viewpoint).norm();
    bool hidden = false;
    for (std::size_t j = 0; j < points.size() && !hidden; ++j)
      hidden = j != i && occludes(points[j], points[i], normals[i], viewpoint, dist, occlusion_radius);
    if (!hidden) visible.push_back(i);
  }
  return visible;
}

CapFixture cap_visibility_sphere(std::size_t n, double sphere_radius, double view_distance, std::uint64_t seed) {
  if (!(sphere_radius > 0.0) || !(view_distance > sphere_radius))
    throw GeometryError(fmt::format("cap fixture needs view distance {} > sphere radius {}", view_distance,
                                    sphere_radius));
  Rng rng(seed);
  CapFixture fx;
  fx.sphere_radius = sphere_radius;
  fx.viewpoint = Vec3(0, 0, view_distance);
  const double threshold = sphere_radius / view_distance;
  fx.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d;
    do {
      d = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    } while (d.norm() < 1e-12);
    d.normalize();
    fx.points.push_back(sphere_radius * d);
    if (d.z() >= threshold) fx.visible.push_back(i);
  }
  return fx;
}

IndexSet hull_bruteforce(std::span<const Vec3> points) {
  const std::size_t n = points.size();
  if (n < 4 || n > 30) throw GeometryError(fmt::format("hull_bruteforce supports 4..30 points, got {}", n));
  Vec3 lo = points.front(), hi = lo;
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double eps = 1e-9 * (hi - lo).norm();
  std::vector<char> vertex(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const Vec3 nrm = (points[j] - points[i]).cross(points[k] - points[i]);
        const double len = nrm.norm();
        if (len <= eps * (hi - lo).norm()) continue;  // collinear triple spans no plane
        const Vec3 u = nrm / len;
        bool pos = false, neg = false, on = false;
        for (std::size_t m = 0; m < n; ++m) {
          if (m == i || m == j || m == k) continue;
          const double s = u.dot(points[m] - points[i]);
          if (s > eps) pos = true;
          else if (s < -eps) neg = true;
          else on = true;
        }
        if (pos && neg) continue;
        if (on) throw GeometryError("hull_bruteforce: four or more points on a supporting plane");
        vertex[i] = vertex[j] = vertex[k] = 1;
      }
  IndexSet out;
  for (std::size_t i = 0; i < n; ++i)
    if (vertex[i]) out.push_back(i);
  return out;
}

MaxpoolEnumeration maxpool_bruteforce(const PointCloud& cloud, const critical::FeatureBank& bank) {
  const std::size_t n = cloud.size();
  if (n == 0 || n > 15) throw GeometryError(fmt::format("maxpool_bruteforce supports 1..15 points, got {}", n));
  const std::size_t k = bank.dimension();
  std::vector<std::vector<double>> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = bank.evaluate(cloud.points[i].position);

  MaxpoolEnumeration out;
  out.u.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.u[j] = std::max(out.u[j], h[i][j]);

  // attains[i] marks the dimensions where point i reaches the set maximum.
  const std::size_t words = (k + 63) / 64;
  std::vector<std::uint64_t> attains(n * words, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (h[i][j] == out.u[j]) attains[i * words + j / 64] |= std::uint64_t{1} << (j % 64);

  const std::size_t subsets = std::size_t{1} << n;
  std::vector<std::uint64_t> cover(subsets * words, 0);
  std::vector<char> equal(subsets, 0);
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(mask));
    const std::size_t rest = mask & (mask - 1);
    bool all = true;
    for (std::size_t w = 0; w < words; ++w) {
      cover[mask * words + w] = cover[rest * words + w] | attains[low * words + w];
      const std::uint64_t full = (w + 1 < words || k % 64 == 0) ? ~std::uint64_t{0}
                                                                 : (std::uint64_t{1} << (k % 64)) - 1;
      if (cover[mask * words + w] != full) all = false;
    }
    equal[mask] = all;
  }
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    if (!equal[mask]) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < n && minimal; ++i)
      if ((mask >> i) & 1) minimal = !equal[mask & ~(std::size_t{1} << i)];
    if (!minimal) continue;
    IndexSet set;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) set.push_back(i);
    out.minimal_sets.push_back(std::move(set));
  }
  std::sort(out.minimal_sets.begin(), out.minimal_sets.end());
  return out;
}

F1Score f1_score(const IndexSet& predicted, const IndexSet& truth) {
  IndexSet p = predicted, t = truth;
  std::sort(p.begin(), p.end());
  std::sort(t.begin(), t.end());
  if (p.empty() && t.empty()) return {1.0, 1.0, 1.0};
  IndexSet both;
  std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(both));
  F1Score s;
  s.precision = p.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(p.size());
  s.recall = t.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(t.size());
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace mvrep::oracles
