#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mvrep {

using Vec3 = Eigen::Vector3d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid configuration values (FovSpec, GridConfig, pipeline options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometric precondition violated by a specific input point.
class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : Error(what), index_(index) {}
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  std::optional<std::size_t> index_;
};

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Color&, const Color&) = default;
};

struct Point {
  Vec3 position = Vec3::Zero();
  Color color;
  std::optional<int> label;

  friend bool operator==(const Point& a, const Point& b) {
    return a.position == b.position && a.color == b.color && a.label == b.label;
  }
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
};

struct PointCloud {
  std::vector<Point> points;
  std::string room_id;
  Aabb bounds;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  /// Recomputes `bounds` from `points`. Throws on an empty cloud.
  void update_bounds();

  std::vector<Vec3> positions() const;

  /// Subset in the order given by `indices`, bounds recomputed.
  PointCloud subset(std::span<const std::size_t> indices, std::string room_id) const;
};

using IndexSet = std::vector<std::size_t>;

}  // namespace mvrep
