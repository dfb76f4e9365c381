#include "mvrep/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "mvrep/random.hpp"

namespace mvrep::critical {

FeatureBank FeatureBank::radial(std::size_t k, std::uint64_t seed, const Aabb& bounds) {
  if (k == 0) throw ConfigError("feature bank dimension must be positive");
  FeatureBank bank;
  bank.kind_ = Kind::kRadial;
  bank.k_ = k;
  bank.seed_ = seed;
  Rng rng(derive_seed(seed, 0x6b));
  const double diag = std::max(bounds.diagonal(), 1e-9);
  for (std::size_t j = 0; j < k; ++j) {
    Vec3 c;
    for (int a = 0; a < 3; ++a) c[a] = uniform(rng, bounds.min[a], bounds.max[a]);
    const double sigma = uniform(rng, 0.05, 0.5) * diag;
    bank.centers_.push_back(c);
    bank.inv_sigma_sq_.push_back(1.0 / (sigma * sigma));
  }
  return bank;
}

FeatureBank FeatureBank::coordinates(std::size_t k) {
  if (k == 0 || k > 3) throw ConfigError("coordinate feature bank supports 1..3 dimensions");
  FeatureBank bank;
  bank.kind_ = Kind::kCoordinate;
  bank.k_ = k;
  return bank;
}

double FeatureBank::evaluate(std::size_t j, const Vec3& x) const {
  if (kind_ == Kind::kCoordinate) return x[static_cast<Eigen::Index>(j)];
  return std::exp(-(x - centers_[j]).squaredNorm() * inv_sigma_sq_[j]);
}

void FeatureBank::evaluate(const Vec3& x, std::span<double> out) const {
  for (std::size_t j = 0; j < k_; ++j) out[j] = evaluate(j, x);
}

std::vector<double> FeatureBank::evaluate(const Vec3& x) const {
  std::vector<double> out(k_);
  evaluate(x, out);
  return out;
}

namespace {

// Per-point features laid out row-major (point, dimension).
std::vector<double> feature_matrix(std::span<const Vec3> points, const FeatureBank& bank) {
  const std::size_t k = bank.dimension();
  std::vector<double> h(points.size() * k);
  for (std::size_t i = 0; i < points.size(); ++i)
    bank.evaluate(points[i], std::span<double>(h.data() + i * k, k));
  return h;
}

using PointKey = std::tuple<double, double, double, int, int, int, int>;

PointKey key_of(const Point& p) {
  return {p.position.x(), p.position.y(), p.position.z(), p.color.r, p.color.g, p.color.b,
          p.label.value_or(std::numeric_limits<int>::min())};
}

}  // namespace

Embedding embed(std::span<const Vec3> points, const FeatureBank& bank) {
  if (points.empty()) throw GeometryError("cannot embed an empty point set");
  Embedding u(bank.dimension(), -std::numeric_limits<double>::infinity());
  std::vector<double> h(bank.dimension());
  for (const Vec3& p : points) {
    bank.evaluate(p, h);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::max(u[j], h[j]);
  }
  return u;
}

Embedding embed(const PointCloud& cloud, const FeatureBank& bank) {
  const auto pts = cloud.positions();
  return embed(pts, bank);
}

CriticalReport critical_set(const PointCloud& cloud, const FeatureBank& bank) {
  if (cloud.empty()) throw GeometryError("cannot compute the critical set of an empty cloud");
  const std::size_t k = bank.dimension();
  const auto pts = cloud.positions();
  const auto h = feature_matrix(pts, bank);
  CriticalReport report;
  report.k = k;
  report.u.assign(k, -std::numeric_limits<double>::infinity());
  report.argmax.assign(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (h[i * k + j] > report.u[j]) {  // strict: keeps the lowest index on ties
        report.u[j] = h[i * k + j];
        report.argmax[j] = i;
      }
  report.critical_indices = report.argmax;
  std::sort(report.critical_indices.begin(), report.critical_indices.end());
  report.critical_indices.erase(std::unique(report.critical_indices.begin(), report.critical_indices.end()),
                                report.critical_indices.end());
  return report;
}

bool in_upper_set(const Vec3& x, const Embedding& u, const FeatureBank& bank) {
  for (std::size_t j = 0; j < bank.dimension(); ++j)
    if (bank.evaluate(j, x) > u[j]) return false;
  return true;
}

SubsetInvarianceReport verify_subset_invariance(const PointCloud& cloud, const FeatureBank& bank,
                                                std::size_t trials, std::uint64_t seed) {
  SubsetInvarianceReport report;
  report.critical = critical_set(cloud, bank);
  const auto& u = report.critical.u;
  const auto pts = cloud.positions();

  std::vector<char> is_critical(pts.size(), 0);
  for (std::size_t i : report.critical.critical_indices) is_critical[i] = 1;
  // Candidates beyond C_S: cloud points inside N_S (all of them, by construction of u).
  std::vector<std::size_t> extra;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!is_critical[i] && in_upper_set(pts[i], u, bank)) extra.push_back(i);

  Rng rng(derive_seed(seed, 0x75));
  std::vector<Vec3> subset;
  for (std::size_t t = 0; t < trials; ++t) {
    subset.clear();
    for (std::size_t i : report.critical.critical_indices) subset.push_back(pts[i]);
    double keep = 0.0;
    if (t == 1) keep = 1.0;
    else if (t > 1) keep = uniform01(rng);
    for (std::size_t i : extra)
      if (keep >= 1.0 || uniform01(rng) < keep) subset.push_back(pts[i]);
    // Order must not matter either.
    for (std::size_t i = subset.size(); i > 1; --i)
      std::swap(subset[i - 1], subset[uniform_index(rng, i)]);

    const Embedding ut = embed(subset, bank);
    SubsetTrial trial;
    trial.size = subset.size();
    for (std::size_t j = 0; j < u.size(); ++j)
      if (ut[j] != u[j]) {
        trial.equal = false;
        trial.dimension = j;
        trial.expected = u[j];
        trial.actual = ut[j];
        break;
      }
    if (!trial.equal) ++report.failures;
    report.trials.push_back(trial);
  }
  return report;
}

MonotonicityReport verify_monotonicity(const PointCloud& dense, const PointCloud& sparse,
                                       std::span<const PointCloud> partials, const FeatureBank& bank) {
  std::map<PointKey, int> dense_keys, sparse_keys;
  for (const Point& p : dense.points) dense_keys.emplace(key_of(p), 0);
  for (const Point& p : sparse.points) {
    if (!dense_keys.contains(key_of(p))) throw GeometryError("sparse cloud is not a subset of the dense cloud");
    sparse_keys.emplace(key_of(p), 0);
  }
  MonotonicityReport report;
  report.case_a = true;
  PointCloud fused = sparse;
  for (std::size_t s = 0; s < partials.size(); ++s)
    for (const Point& p : partials[s].points) {
      const PointKey key = key_of(p);
      if (!dense_keys.contains(key))
        throw GeometryError(fmt::format("partial set {} is not a subset of the dense cloud", s));
      if (!sparse_keys.contains(key)) report.case_a = false;
      fused.points.push_back(p);
    }

  report.u_sparse = embed(sparse, bank);
  report.u_fused = embed(fused, bank);
  report.u_dense = embed(dense, bank);
  for (std::size_t j = 0; j < bank.dimension(); ++j) {
    const double a = report.u_sparse[j], b = report.u_fused[j], c = report.u_dense[j];
    if (!(a <= b)) report.violations.push_back({j, "u(sparse) <= u(fused)", a, b});
    if (!(b <= c)) report.violations.push_back({j, "u(fused) <= u(dense)", b, c});
    if (report.case_a && a != b) report.violations.push_back({j, "u(fused) == u(sparse)", b, a});
    if (b > a) ++report.strict_increases;
  }
  report.critical_sparse = critical_set(sparse, bank).critical_indices.size();
  report.critical_fused = critical_set(fused, bank).critical_indices.size();
  report.critical_dense = critical_set(dense, bank).critical_indices.size();
  return report;
}

}  // namespace mvrep::critical
