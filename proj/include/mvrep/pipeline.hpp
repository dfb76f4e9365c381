#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvrep/geometry.hpp"
#include "mvrep/io.hpp"
#include "mvrep/viewpoints.hpp"

namespace mvrep::pipeline {

struct PipelineConfig {
  FovSpec fov;
  GridConfig grid;
  /// Partial sets with fewer points are dropped.
  std::size_t min_points = 40000;
  double radius_factor = 100.0;
  std::uint64_t seed = 0;
  /// Union coverage below this fraction of the input produces a warning.
  double coverage_target = 0.8;

  void validate() const;
  /// Effective configuration as canonical JSON (what the manifest echoes and hashes).
  nlohmann::json to_json() const;
  /// 16 hex digits of FNV-1a over to_json().dump().
  std::string hash() const;
};

struct MultiviewResult {
  std::vector<PointCloud> partials;
  /// Indices into the input cloud for each partial set, parallel to `partials`.
  std::vector<IndexSet> partial_indices;
  io::MultiviewManifest manifest;
  std::size_t perspectives_evaluated = 0;
  /// |union of partial sets| / |input|.
  double coverage = 0.0;
  std::vector<std::string> warnings;
};

/// Frustum cull, hidden point removal, and threshold for every enumerated perspective.
/// Perspectives run on `jobs` worker threads; results merge in perspective-id order, so the
/// output does not depend on `jobs`. Geometry errors are rethrown annotated with the
/// perspective id. `source_path` and `area` are copied into the manifest.
MultiviewResult generate_multiview(const PointCloud& cloud, const PipelineConfig& config, std::size_t jobs = 1,
                                   const std::string& source_path = {}, const std::string& area = {});

/// Writes every partial set under `out_dir` and the manifest as "<room_id>.manifest.json".
/// Returns the manifest path.
std::filesystem::path write_multiview(const MultiviewResult& result, const std::filesystem::path& out_dir);

/// Order-preserving subsequence of the sets holding at least `min_points` points.
std::vector<PointCloud> filter_by_threshold(std::vector<PointCloud> sets, std::size_t min_points);

struct FusionRecipe {
  std::size_t partial_per_area = 0;
  bool include_originals = true;
};

/// Training sources of one area: original room files and partial-set files.
struct AreaSources {
  std::string area;
  std::vector<std::string> originals;
  std::vector<std::string> partials;
};

/// Groups manifests by area. Partial paths are resolved against each manifest's directory.
std::vector<AreaSources> collect_area_sources(const std::vector<std::filesystem::path>& manifest_paths);

/// Per area (in the given order): all originals when requested, then partial_per_area partials
/// drawn uniformly without replacement with a per-area stream of `seed`. Throws Error
/// naming the area when it has fewer partials than requested.
std::vector<std::string> fuse_training_set(const std::vector<AreaSources>& areas, const FusionRecipe& recipe,
                                           std::uint64_t seed);

using Feature9 = std::array<double, 9>;

/// (x, y, z, r/255, g/255, b/255, nx, ny, nz) with n the position normalised to `room_bounds`;
/// an axis of zero extent normalises to 0. Throws GeometryError for a point more than 1e-6
/// outside the bounds.
std::vector<Feature9> normalize_features(const PointCloud& cloud, const Aabb& room_bounds);

struct Block {
  long cell_x = 0;
  long cell_y = 0;
  /// Exactly points_per_block indices into the cloud.
  IndexSet indices;
};

/// Horizontal block_size grid anchored at the cloud's min corner. Every non-empty cell is
/// resampled to points_per_block points: without replacement when it holds enough, with
/// replacement otherwise. Blocks come ordered by (cell_x, cell_y).
std::vector<Block> split_blocks(const PointCloud& cloud, double block_size, std::size_t points_per_block,
                                std::uint64_t seed);

}  // namespace mvrep::pipeline
