#pragma once

// Max-pooled set embeddings and their critical point sets.
//
// A set S of points is embedded as u(S) = elementwise max of h(x) over x in S, where
// h : R^3 -> R^K is a fixed per-point feature map. Any set function f = gamma(u(S)) is then
// fully determined by u, so the points attaining each coordinate maximum (the critical set C_S)
// determine f: every T with C_S subset T subset N_S, where N_S holds the points with
// h(x) <= u(S) elementwise, satisfies u(T) = u(S).

#include <cstdint>
#include <string>
#include <vector>

#include "mvrep/types.hpp"

namespace mvrep::critical {

/// Deterministic feature map h : R^3 -> R^K.
class FeatureBank {
 public:
  /// Radial-basis soft indicators h_j(x) = exp(-|x - c_j|^2 / sigma_j^2). Centres are drawn
  /// uniformly in `bounds`, widths uniformly in [0.05, 0.5] times the bounds diagonal.
  static FeatureBank radial(std::size_t k, std::uint64_t seed, const Aabb& bounds);

  /// Coordinate maps h_j(x) = x[j] for j < k <= 3, for hand-checkable fixtures.
  static FeatureBank coordinates(std::size_t k);

  std::size_t dimension() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double evaluate(std::size_t j, const Vec3& x) const;
  /// Writes all K features of `x` into `out` (size K).
  void evaluate(const Vec3& x, std::span<double> out) const;
  std::vector<double> evaluate(const Vec3& x) const;

 private:
  enum class Kind { kRadial, kCoordinate };

  Kind kind_ = Kind::kRadial;
  std::size_t k_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Vec3> centers_;
  std::vector<double> inv_sigma_sq_;
};

using Embedding = std::vector<double>;

struct CriticalReport {
  Embedding u;
  /// Sorted, unique indices of C_S.
  IndexSet critical_indices;
  /// For each dimension j, the index attaining u_j (lowest index on ties).
  IndexSet argmax;
  std::size_t k = 0;

  std::string upper_set_predicate() const { return "h(x) <= u(S) elementwise"; }
};

/// u_j = max over points of h_j. Throws GeometryError on an empty cloud.
Embedding embed(const PointCloud& cloud, const FeatureBank& bank);
Embedding embed(std::span<const Vec3> points, const FeatureBank& bank);

CriticalReport critical_set(const PointCloud& cloud, const FeatureBank& bank);

/// True iff h(x) <= u elementwise, i.e. x belongs to the upper-bound set N_S.
bool in_upper_set(const Vec3& x, const Embedding& u, const FeatureBank& bank);

struct SubsetTrial {
  std::size_t size = 0;
  bool equal = true;
  /// First dimension that differed, with the two values; only meaningful when !equal.
  std::size_t dimension = 0;
  double expected = 0.0;
  double actual = 0.0;
};

struct SubsetInvarianceReport {
  CriticalReport critical;
  std::vector<SubsetTrial> trials;
  std::size_t failures = 0;
  bool passed() const noexcept { return failures == 0; }
};

/// Samples `trials` sets T with C_S subset T subset (N_S intersect cloud) and checks u(T) == u(S)
/// exactly. The first trial is T = C_S, the second T = cloud, the rest random in between.
SubsetInvarianceReport verify_subset_invariance(const PointCloud& cloud, const FeatureBank& bank,
                                                std::size_t trials, std::uint64_t seed);

struct DimensionViolation {
  std::size_t dimension;
  std::string relation;  // which inequality or equality failed
  double lhs;
  double rhs;
};

struct MonotonicityReport {
  Embedding u_sparse;
  Embedding u_fused;  // u(sparse union partials)
  Embedding u_dense;
  bool case_a = false;  // every partial is a subset of sparse
  std::vector<DimensionViolation> violations;
  std::size_t strict_increases = 0;  // dimensions with u_fused_j > u_sparse_j
  std::size_t critical_sparse = 0;   // |C'_S|
  std::size_t critical_fused = 0;    // |C''_S|
  std::size_t critical_dense = 0;    // |C_S|
  bool passed() const noexcept { return violations.empty(); }
};

/// Checks u(sparse) <= u(sparse union partials) <= u(dense) elementwise, and exact equality when
/// every partial lies within sparse. Subsets are matched by point identity (position, colour,
/// label). Throws GeometryError when sparse or a partial is not a subset of dense.
MonotonicityReport verify_monotonicity(const PointCloud& dense, const PointCloud& sparse,
                                       std::span<const PointCloud> partials, const FeatureBank& bank);

}  // namespace mvrep::critical
