#include "mvrep/convex_hull.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mvrep/geometry.hpp"

namespace mvrep {

namespace {

struct Face {
  std::array<int, 3> v{};
  // nbr[i] is the face across edge v[i] -> v[(i + 1) % 3].
  std::array<int, 3> nbr{-1, -1, -1};
  Vec3 normal = Vec3::Zero();
  double offset = 0.0;
  std::vector<int> outside;
  int farthest = -1;
  double farthest_dist = 0.0;
  unsigned visit = 0;
  bool visible = false;
  bool alive = false;

  double distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

class Quickhull {
 public:
  Quickhull(std::span<const Vec3> input) : n_(static_cast<int>(input.size())) {
    const Aabb box = bounding_box(input);
    const Vec3 center = box.center();
    pts_.reserve(input.size());
    for (const Vec3& p : input) pts_.push_back(p - center);
    eps_ = kHullRelativeEps * box.diagonal();
    start_at_.assign(input.size(), -1);
    end_at_.assign(input.size(), -1);
  }

  ConvexHull3 run() {
    build_simplex();
    while (!pending_.empty()) {
      const int f = pending_.back();
      pending_.pop_back();
      if (!faces_[f].alive || faces_[f].outside.empty()) continue;
      add_point(f);
    }
    return collect();
  }

 private:
  void set_plane(Face& face) const {
    const Vec3& a = pts_[face.v[0]];
    const Vec3& b = pts_[face.v[1]];
    const Vec3& c = pts_[face.v[2]];
    // Cross the two edges sharing the vertex opposite the longest edge.
    const Vec3 ab = b - a, bc = c - b, ca = a - c;
    const double lab = ab.squaredNorm(), lbc = bc.squaredNorm(), lca = ca.squaredNorm();
    Vec3 n;
    if (lab >= lbc && lab >= lca) {
      n = bc.cross(ca);
    } else if (lbc >= lab && lbc >= lca) {
      n = ca.cross(ab);
    } else {
      n = ab.cross(bc);
    }
    const double len = n.norm();
    face.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    face.offset = face.normal.dot((a + b + c) / 3.0);
  }

  int new_face(int a, int b, int c) {
    int id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<int>(faces_.size());
      faces_.emplace_back();
    }
    Face& f = faces_[id];
    f.v = {a, b, c};
    f.nbr = {-1, -1, -1};
    f.outside.clear();
    f.farthest = -1;
    f.farthest_dist = 0.0;
    f.visible = false;
    f.alive = true;
    set_plane(f);
    return id;
  }

  void assign(int face_id, int point) {
    Face& f = faces_[face_id];
    const double d = f.distance(pts_[point]);
    f.outside.push_back(point);
    if (f.farthest < 0 || d > f.farthest_dist) {
      f.farthest = point;
      f.farthest_dist = d;
    }
  }

  double line_distance(const Vec3& a, const Vec3& b, const Vec3& p) const {
    const Vec3 dir = (b - a).normalized();
    const Vec3 r = p - a;
    return (r - r.dot(dir) * dir).norm();
  }

  void build_simplex() {
    // Extreme points along each axis; the widest pair seeds the simplex.
    std::array<int, 6> ext{};
    for (int axis = 0; axis < 3; ++axis) {
      int lo = 0, hi = 0;
      for (int i = 1; i < n_; ++i) {
        if (pts_[i][axis] < pts_[lo][axis]) lo = i;
        if (pts_[i][axis] > pts_[hi][axis]) hi = i;
      }
      ext[2 * axis] = lo;
      ext[2 * axis + 1] = hi;
    }
    int i0 = ext[0], i1 = ext[1];
    double best = -1.0;
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) {
        const double d = (pts_[ext[a]] - pts_[ext[b]]).squaredNorm();
        if (d > best) {
          best = d;
          i0 = ext[a];
          i1 = ext[b];
        }
      }
    if (std::sqrt(best) <= eps_) throw DegenerateHullError("all hull input points coincide", 0);

    int i2 = -1;
    best = -1.0;
    for (int i = 0; i < n_; ++i) {
      const double d = line_distance(pts_[i0], pts_[i1], pts_[i]);
      if (d > best) {
        best = d;
        i2 = i;
      }
    }
    if (best <= eps_) throw DegenerateHullError("hull input points are collinear", 1);

    Vec3 n = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    int i3 = -1;
    best = -1.0;
    for (int i = 0; i < n_; ++i) {
      const double d = std::abs(n.dot(pts_[i] - pts_[i0]));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (best <= eps_) throw DegenerateHullError("hull input points are coplanar", 2);

    // Orient the base so the apex lies behind it.
    if (n.dot(pts_[i3] - pts_[i0]) > 0.0) std::swap(i1, i2);
    const int a = i0, b = i1, c = i2, d = i3;
    std::array<int, 4> ids{new_face(a, b, c), new_face(b, a, d), new_face(c, b, d), new_face(a, c, d)};
    for (int f : ids)
      for (int e = 0; e < 3; ++e) {
        const int u = faces_[f].v[e], w = faces_[f].v[(e + 1) % 3];
        for (int g : ids) {
          if (g == f) continue;
          for (int k = 0; k < 3; ++k)
            if (faces_[g].v[k] == w && faces_[g].v[(k + 1) % 3] == u) faces_[f].nbr[e] = g;
        }
      }

    for (int i = 0; i < n_; ++i) {
      if (i == a || i == b || i == c || i == d) continue;
      for (int f : ids) {
        if (faces_[f].distance(pts_[i]) > eps_) {
          assign(f, i);
          break;
        }
      }
    }
    for (int f : ids)
      if (!faces_[f].outside.empty()) pending_.push_back(f);
  }

  void add_point(int start) {
    const int eye = faces_[start].farthest;
    const Vec3& p = pts_[eye];
    ++stamp_;

    visible_.clear();
    horizon_.clear();
    stack_.clear();
    faces_[start].visit = stamp_;
    faces_[start].visible = true;
    stack_.push_back(start);
    while (!stack_.empty()) {
      const int f = stack_.back();
      stack_.pop_back();
      visible_.push_back(f);
      for (int e = 0; e < 3; ++e) {
        const int g = faces_[f].nbr[e];
        Face& gf = faces_[g];
        if (gf.visit != stamp_) {
          gf.visit = stamp_;
          gf.visible = gf.distance(p) > eps_;
          if (gf.visible) stack_.push_back(g);
        }
        if (!gf.visible) horizon_.push_back({f, e});
      }
    }

    orphans_.clear();
    for (int f : visible_) {
      for (int q : faces_[f].outside)
        if (q != eye) orphans_.push_back(q);
    }

    // Horizon edges u -> w on visible faces become new faces (u, w, eye).
    new_faces_.clear();
    for (const auto& [f, e] : horizon_) {
      const int u = faces_[f].v[e];
      const int w = faces_[f].v[(e + 1) % 3];
      const int g = faces_[f].nbr[e];
      int back = 0;
      while (faces_[g].nbr[back] != f) ++back;
      new_faces_.push_back({u, w, g, back});
    }
    for (int f : visible_) {
      faces_[f].alive = false;
      faces_[f].outside.clear();
      free_.push_back(f);
    }
    created_.clear();
    for (const NewFace& nf : new_faces_) {
      const int id = new_face(nf.u, nf.w, eye);
      faces_[id].nbr[0] = nf.outer;
      faces_[nf.outer].nbr[nf.outer_edge] = id;
      start_at_[nf.u] = id;
      end_at_[nf.w] = id;
      created_.push_back(id);
    }
    for (int id : created_) {
      Face& f = faces_[id];
      f.nbr[1] = start_at_[f.v[1]];
      f.nbr[2] = end_at_[f.v[0]];
    }

    for (int q : orphans_) {
      for (int id : created_) {
        if (faces_[id].distance(pts_[q]) > eps_) {
          assign(id, q);
          break;
        }
      }
    }
    for (int id : created_)
      if (!faces_[id].outside.empty()) pending_.push_back(id);
  }

  ConvexHull3 collect() const {
    ConvexHull3 hull;
    hull.eps = eps_;
    std::vector<char> used(pts_.size(), 0);
    for (const Face& f : faces_) {
      if (!f.alive) continue;
      hull.facets.push_back({static_cast<std::size_t>(f.v[0]), static_cast<std::size_t>(f.v[1]),
                             static_cast<std::size_t>(f.v[2])});
      for (int v : f.v) used[v] = 1;
    }
    for (std::size_t i = 0; i < used.size(); ++i)
      if (used[i]) hull.vertex_indices.push_back(i);
    return hull;
  }

  struct NewFace {
    int u, w, outer, outer_edge;
  };

  int n_;
  std::vector<Vec3> pts_;
  double eps_ = 0.0;
  std::vector<Face> faces_;
  std::vector<int> free_;
  std::vector<int> pending_;
  std::vector<int> start_at_, end_at_;
  unsigned stamp_ = 0;
  std::vector<int> visible_, stack_, orphans_, created_;
  std::vector<std::pair<int, int>> horizon_;
  std::vector<NewFace> new_faces_;
};

}  // namespace

ConvexHull3 convex_hull_3d(std::span<const Vec3> points) {
  if (points.size() < 4)
    throw DegenerateHullError(fmt::format("convex hull needs at least 4 points, got {}", points.size()),
                              points.empty() ? 0 : static_cast<int>(points.size()) - 1);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].allFinite()) throw GeometryError(fmt::format("hull input point {} is not finite", i), i);
  return Quickhull(points).run();
}

double facet_signed_distance(std::span<const Vec3> points, const std::array<std::size_t, 3>& f,
                             const Vec3& p) {
  const Vec3& a = points[f[0]];
  const Vec3 n = (points[f[1]] - a).cross(points[f[2]] - a);
  const double len = n.norm();
  if (len == 0.0) return 0.0;
  return n.dot(p - a) / len;
}

}  // namespace mvrep
