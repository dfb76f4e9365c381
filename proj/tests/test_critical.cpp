#include <algorithm>
#include <random>

#include "doctest.h"
#include "mvrep/critical.hpp"
#include "mvrep/oracles.hpp"

using mvrep::Vec3;
namespace cr = mvrep::critical;

namespace {

mvrep::PointCloud cloud_of(const std::vector<Vec3>& pts) {
  mvrep::PointCloud c;
  for (const Vec3& p : pts) c.points.push_back({p, {}, std::nullopt});
  c.update_bounds();
  return c;
}

mvrep::PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng) * 0.75);
  return cloud_of(pts);
}

mvrep::PointCloud five_point_fixture() {
  return cloud_of({{0, 0, 0}, {1, 0.2, 0}, {0.3, 0.9, 0}, {0.5, 0.5, 0}, {0.2, 0.1, 0}});
}

}  // namespace

TEST_CASE("feature bank") {
  const auto c = random_cloud(10, 1);
  const auto a = cr::FeatureBank::radial(16, 5, c.bounds);
  const auto b = cr::FeatureBank::radial(16, 5, c.bounds);
  const auto other = cr::FeatureBank::radial(16, 6, c.bounds);
  CHECK(a.dimension() == 16);
  for (const auto& p : c.points) {
    CHECK(a.evaluate(p.position) == b.evaluate(p.position));
    CHECK(a.evaluate(p.position) != other.evaluate(p.position));
    for (double h : a.evaluate(p.position)) {
      CHECK(h > 0.0);
      CHECK(h <= 1.0);
    }
  }
  const auto xy = cr::FeatureBank::coordinates(2);
  CHECK(xy.evaluate(Vec3(0.25, -3, 7)) == std::vector<double>{0.25, -3});
  CHECK_THROWS_AS(cr::FeatureBank::coordinates(4), mvrep::ConfigError);
}

TEST_CASE("embed") {
  const auto bank = cr::FeatureBank::radial(8, 0, {Vec3::Zero(), Vec3(1, 1, 1)});
  const auto single = cloud_of({{0.2, 0.3, 0.4}});
  CHECK(cr::embed(single, bank) == bank.evaluate(Vec3(0.2, 0.3, 0.4)));

  auto c = random_cloud(200, 2);
  const auto u = cr::embed(c, bank);
  auto dup = c;
  dup.points.push_back(c.points[17]);
  CHECK(cr::embed(dup, bank) == u);
  std::mt19937_64 rng(3);
  std::shuffle(c.points.begin(), c.points.end(), rng);
  CHECK(cr::embed(c, bank) == u);
  CHECK_THROWS_AS(cr::embed(mvrep::PointCloud{}, bank), mvrep::GeometryError);
}

TEST_CASE("five-point coordinate fixture") {
  const auto c = five_point_fixture();
  const auto bank = cr::FeatureBank::coordinates(2);
  const auto r = cr::critical_set(c, bank);
  CHECK(r.critical_indices == mvrep::IndexSet{1, 2});
  CHECK(r.u == cr::Embedding{1.0, 0.9});
  CHECK(r.k == 2);

  // every one of the 32 subsets: u(T) = u(S) exactly when C_S is inside T
  for (unsigned mask = 1; mask < 32; ++mask) {
    std::vector<Vec3> t;
    for (unsigned i = 0; i < 5; ++i)
      if (mask >> i & 1u) t.push_back(c.points[i].position);
    const bool contains = (mask & 0b110u) == 0b110u;
    CHECK((cr::embed(t, bank) == r.u) == contains);
  }
  const auto e = mvrep::oracles::maxpool_bruteforce(c, bank);
  REQUIRE(e.minimal_sets.size() == 1);
  CHECK(e.minimal_sets[0] == r.critical_indices);
}

TEST_CASE("critical set edge cases") {
  const auto c = random_cloud(100, 4);
  CHECK(cr::critical_set(c, cr::FeatureBank::radial(1, 0, c.bounds)).critical_indices.size() == 1);
  const auto same = cloud_of(std::vector<Vec3>(7, Vec3(1, 2, 3)));
  CHECK(cr::critical_set(same, cr::FeatureBank::radial(5, 0, same.bounds)).critical_indices == mvrep::IndexSet{0});
}

TEST_CASE("critical set is bounded by K and removal breaks u") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = random_cloud(2048, 10 + seed);
    const auto bank = cr::FeatureBank::radial(64, seed, c.bounds);
    const auto r = cr::critical_set(c, bank);
    CHECK(r.critical_indices.size() <= 64);
    CHECK(r.critical_indices.back() < c.size());
    // random RBF argmaxes are unique here, so dropping a critical point lowers u in its dimension
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t drop = r.argmax[j];
      std::vector<Vec3> rest;
      for (std::size_t i = 0; i < c.size(); ++i)
        if (i != drop) rest.push_back(c.points[i].position);
      CHECK(cr::embed(rest, bank)[j] < r.u[j]);
    }
  }
}

TEST_CASE("subset invariance") {
  const auto c = random_cloud(2048, 77);
  const auto bank = cr::FeatureBank::radial(64, 77, c.bounds);
  const auto rep = cr::verify_subset_invariance(c, bank, 50, 1);
  REQUIRE(rep.trials.size() == 50);
  CHECK(rep.passed());
  CHECK(rep.trials[0].size == rep.critical.critical_indices.size());
  CHECK(rep.trials[1].size == c.size());
  for (const auto& t : rep.trials) {
    CHECK(t.equal);
    CHECK(t.size >= rep.critical.critical_indices.size());
    CHECK(t.size <= c.size());
  }
  for (const auto& p : c.points) CHECK(cr::in_upper_set(p.position, rep.critical.u, bank));
  const auto again = cr::verify_subset_invariance(c, bank, 50, 1);
  for (std::size_t i = 0; i < 50; ++i) CHECK(again.trials[i].size == rep.trials[i].size);
}

TEST_CASE("monotonicity") {
  const auto dense = random_cloud(600, 5);
  const auto bank = cr::FeatureBank::radial(32, 5, dense.bounds);
  mvrep::IndexSet sparse_idx, rest_idx;
  for (std::size_t i = 0; i < dense.size(); ++i) (i % 3 == 0 ? sparse_idx : rest_idx).push_back(i);
  const auto sparse = dense.subset(sparse_idx, "sparse");

  SUBCASE("partials inside sparse") {
    const std::vector<mvrep::PointCloud> partials{
        dense.subset(mvrep::IndexSet(sparse_idx.begin(), sparse_idx.begin() + 50), "a"),
        dense.subset(mvrep::IndexSet(sparse_idx.end() - 30, sparse_idx.end()), "b")};
    const auto rep = cr::verify_monotonicity(dense, sparse, partials, bank);
    CHECK(rep.case_a);
    CHECK(rep.passed());
    CHECK(rep.u_fused == rep.u_sparse);
    CHECK(rep.strict_increases == 0);
  }
  SUBCASE("partials add unseen points") {
    // the dense argmax of dimension 0, placed in a partial, raises u_0 above the sparse value
    const auto r = cr::critical_set(dense, bank);
    std::size_t j = 0;
    while (j < 32 && std::find(sparse_idx.begin(), sparse_idx.end(), r.argmax[j]) != sparse_idx.end()) ++j;
    REQUIRE(j < 32);
    const std::vector<mvrep::PointCloud> partials{dense.subset(mvrep::IndexSet{r.argmax[j], rest_idx[0]}, "p")};
    const auto rep = cr::verify_monotonicity(dense, sparse, partials, bank);
    CHECK_FALSE(rep.case_a);
    CHECK(rep.passed());
    CHECK(rep.strict_increases >= 1);
    CHECK(rep.u_fused[j] > rep.u_sparse[j]);
    for (std::size_t d = 0; d < 32; ++d) {
      CHECK(rep.u_sparse[d] <= rep.u_fused[d]);
      CHECK(rep.u_fused[d] <= rep.u_dense[d]);
    }
    CHECK(rep.critical_sparse <= 32);
    CHECK(rep.critical_dense <= 32);
  }
  SUBCASE("no partials") {
    const auto rep = cr::verify_monotonicity(dense, sparse, {}, bank);
    CHECK(rep.u_fused == rep.u_sparse);
    CHECK(rep.passed());
  }
  SUBCASE("subset preconditions") {
    const auto stranger = cloud_of({{9, 9, 9}});
    CHECK_THROWS_AS(cr::verify_monotonicity(dense, stranger, {}, bank), mvrep::GeometryError);
    const std::vector<mvrep::PointCloud> bad{stranger};
    CHECK_THROWS_AS(cr::verify_monotonicity(dense, sparse, bad, bank), mvrep::GeometryError);
  }
}
