#include "mvrep/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "mvrep/hpr.hpp"
#include "mvrep/random.hpp"

namespace mvrep::pipeline {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  fov.validate();
  grid.validate();
  if (!(radius_factor > 0.0)) throw ConfigError(fmt::format("radius factor must be positive, got {}", radius_factor));
  if (!(coverage_target >= 0.0 && coverage_target <= 1.0))
    throw ConfigError(fmt::format("coverage target must be in [0, 1], got {}", coverage_target));
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"hfov", fov.hfov_deg},
          {"vfov", fov.vfov_deg},
          {"min-depth", fov.min_depth},
          {"max-depth", fov.max_depth},
          {"spacing", grid.spacing},
          {"camera-height", grid.camera_height},
          {"yaw-steps", grid.yaw_steps},
          {"pitch-steps", grid.pitch_steps},
          {"include-boundary", grid.include_boundary},
          {"min-points", min_points},
          {"radius-factor", radius_factor},
          {"seed", seed},
          {"coverage-target", coverage_target}};
}

std::string PipelineConfig::hash() const { return fmt::format("{:016x}", fnv1a(to_json().dump())); }

namespace {

struct ViewOutcome {
  IndexSet visible;  // indices into the input cloud, sorted
  std::exception_ptr error;
};

ViewOutcome run_perspective(std::span<const Vec3> positions, const Perspective& perspective,
                            const PipelineConfig& config, std::size_t keep_at_least) {
  ViewOutcome out;
  try {
    const FrustumTest frustum(perspective);
    IndexSet culled;
    for (std::size_t i = 0; i < positions.size(); ++i)
      if (frustum.contains(positions[i])) culled.push_back(i);
    // HPR output is a subset of the culled set, so a small cull can never pass the threshold.
    if (culled.size() < keep_at_least) return out;
    std::vector<Vec3> local;
    local.reserve(culled.size());
    for (std::size_t i : culled) local.push_back(positions[i]);
    const IndexSet visible = hpr::visible_points(local, perspective.viewpoint, config.radius_factor,
                                                 derive_seed(config.seed, static_cast<std::uint64_t>(perspective.id)));
    out.visible.reserve(visible.size());
    for (std::size_t v : visible) out.visible.push_back(culled[v]);
  } catch (...) {
    out.error = std::current_exception();
  }
  return out;
}

}  // namespace

MultiviewResult generate_multiview(const PointCloud& cloud, const PipelineConfig& config, std::size_t jobs,
                                   const std::string& source_path, const std::string& area) {
  config.validate();
  if (cloud.empty()) throw GeometryError("cannot generate views of an empty cloud");
  const Aabb bounds = bounding_box(cloud);
  const auto viewpoints = grid_viewpoints(bounds, config.grid);
  const auto perspectives = enumerate_perspectives(viewpoints, config.grid, config.fov);
  const auto positions = cloud.positions();
  const std::size_t keep_at_least = std::max<std::size_t>(config.min_points, 1);

  std::vector<ViewOutcome> outcomes(perspectives.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < perspectives.size(); k = next++)
      outcomes[k] = run_perspective(positions, perspectives[k], config, keep_at_least);
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(perspectives.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  MultiviewResult result;
  result.perspectives_evaluated = perspectives.size();
  auto& m = result.manifest;
  m.room_id = cloud.room_id;
  m.area = area;
  m.source_path = source_path;
  m.original_count = cloud.size();
  m.seed = config.seed;
  m.min_points = config.min_points;
  m.config = config.to_json();
  m.generation_config_hash = config.hash();

  std::vector<char> covered(cloud.size(), 0);
  std::size_t covered_count = 0;
  for (std::size_t k = 0; k < perspectives.size(); ++k) {
    const Perspective& p = perspectives[k];
    if (outcomes[k].error) {
      try {
        std::rethrow_exception(outcomes[k].error);
      } catch (const std::exception& e) {
        throw GeometryError(fmt::format("perspective {}: {}", p.id, e.what()));
      }
    }
    IndexSet& visible = outcomes[k].visible;
    if (visible.size() < keep_at_least) continue;
    const std::string file = io::partial_set_filename(cloud.room_id, p.id, p.yaw_deg, p.pitch_deg);
    result.partials.push_back(cloud.subset(visible, fs::path(file).stem().string()));
    m.entries.push_back({p.id, p.viewpoint, p.yaw_deg, p.pitch_deg, visible.size(), file});
    for (std::size_t i : visible)
      if (!covered[i]) {
        covered[i] = 1;
        ++covered_count;
      }
    result.partial_indices.push_back(std::move(visible));
  }
  result.coverage = static_cast<double>(covered_count) / static_cast<double>(cloud.size());
  m.coverage = result.coverage;

  if (m.entries.empty())
    result.warnings.push_back(fmt::format("no perspective of '{}' reached {} points", cloud.room_id, config.min_points));
  if (result.coverage < config.coverage_target)
    result.warnings.push_back(fmt::format("partial sets cover {:.3f} of '{}', below the target {:.3f}",
                                          result.coverage, cloud.room_id, config.coverage_target));
  const CoverageEstimate frustum_cover = estimate_coverage(bounds, perspectives, 20000, config.seed);
  if (frustum_cover.uncovered > 0)
    result.warnings.push_back(fmt::format("viewpoint grid leaves {:.4f} of the room volume outside every frustum",
                                          frustum_cover.uncovered_fraction()));
  return result;
}

fs::path write_multiview(const MultiviewResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < result.partials.size(); ++i)
    io::write_partial_set(result.partials[i], out_dir / result.manifest.entries[i].file_path);
  const fs::path manifest_path = out_dir / (result.manifest.room_id + ".manifest.json");
  io::write_manifest(result.manifest, manifest_path);
  return manifest_path;
}

std::vector<PointCloud> filter_by_threshold(std::vector<PointCloud> sets, std::size_t min_points) {
  std::vector<PointCloud> out;
  for (PointCloud& s : sets)
    if (s.size() >= min_points) out.push_back(std::move(s));
  return out;
}

std::vector<AreaSources> collect_area_sources(const std::vector<fs::path>& manifest_paths) {
  std::map<std::string, AreaSources> by_area;
  for (const fs::path& path : manifest_paths) {
    const io::MultiviewManifest m = io::read_manifest(path);
    const std::string area = m.area.empty() ? "unassigned" : m.area;
    AreaSources& src = by_area[area];
    src.area = area;
    src.originals.push_back(m.source_path.empty() ? m.room_id : m.source_path);
    for (const auto& e : m.entries) src.partials.push_back((path.parent_path() / e.file_path).generic_string());
  }
  std::vector<AreaSources> out;
  for (auto& [_, src] : by_area) out.push_back(std::move(src));
  return out;
}

std::vector<std::string> fuse_training_set(const std::vector<AreaSources>& areas, const FusionRecipe& recipe,
                                           std::uint64_t seed) {
  for (const AreaSources& a : areas)
    if (recipe.partial_per_area > a.partials.size())
      throw Error(fmt::format("area '{}' has {} partial sets, recipe asks for {}", a.area, a.partials.size(),
                                    recipe.partial_per_area));
  std::vector<std::string> list;
  for (const AreaSources& a : areas) {
    if (recipe.include_originals) list.insert(list.end(), a.originals.begin(), a.originals.end());
    Rng rng(derive_seed(seed, fnv1a(a.area)));
    for (std::size_t i : sample_without_replacement(a.partials.size(), recipe.partial_per_area, rng))
      list.push_back(a.partials[i]);
  }
  return list;
}

std::vector<Feature9> normalize_features(const PointCloud& cloud, const Aabb& room_bounds) {
  const Vec3 ext = room_bounds.extent();
  std::vector<Feature9> out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud.points[i];
    if (!room_bounds.contains(p.position, 1e-6))
      throw GeometryError(fmt::format("point {} lies outside the room bounds", i), i);
    Feature9 f;
    for (int a = 0; a < 3; ++a) {
      f[a] = p.position[a];
      f[6 + a] = ext[a] > 0.0 ? std::clamp((p.position[a] - room_bounds.min[a]) / ext[a], 0.0, 1.0) : 0.0;
    }
    f[3] = p.color.r / 255.0;
    f[4] = p.color.g / 255.0;
    f[5] = p.color.b / 255.0;
    out.push_back(f);
  }
  return out;
}

std::vector<Block> split_blocks(const PointCloud& cloud, double block_size, std::size_t points_per_block,
                                std::uint64_t seed) {
  if (!(block_size > 0.0)) throw ConfigError("block size must be positive");
  if (points_per_block == 0) throw ConfigError("points per block must be positive");
  if (cloud.empty()) return {};
  const Aabb box = bounding_box(cloud);
  std::map<std::pair<long, long>, IndexSet> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i].position;
    const long cx = static_cast<long>(std::floor((p.x() - box.min.x()) / block_size));
    const long cy = static_cast<long>(std::floor((p.y() - box.min.y()) / block_size));
    cells[{cx, cy}].push_back(i);
  }
  // A point exactly on the far boundary belongs to the last cell, not a new one.
  const long last_x = std::max(0L, static_cast<long>(std::ceil(box.extent().x() / block_size)) - 1);
  const long last_y = std::max(0L, static_cast<long>(std::ceil(box.extent().y() / block_size)) - 1);
  std::map<std::pair<long, long>, IndexSet> clamped;
  for (auto& [key, idx] : cells) {
    auto& dst = clamped[{std::min(key.first, last_x), std::min(key.second, last_y)}];
    dst.insert(dst.end(), idx.begin(), idx.end());
  }
  std::vector<Block> blocks;
  for (auto& [key, idx] : clamped) {
    std::sort(idx.begin(), idx.end());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(key.first) * 1000003ULL + static_cast<std::uint64_t>(key.second)));
    const auto pick = idx.size() >= points_per_block ? sample_without_replacement(idx.size(), points_per_block, rng)
                                                     : sample_with_replacement(idx.size(), points_per_block, rng);
    Block b{key.first, key.second, {}};
    b.indices.reserve(points_per_block);
    for (std::size_t k : pick) b.indices.push_back(idx[k]);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace mvrep::pipeline
