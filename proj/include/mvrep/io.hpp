#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mvrep/types.hpp"

namespace mvrep::io {

/// Category names of the Stanford indoor dataset; the label id is the index.
inline constexpr std::array<std::string_view, 13> kS3disCategories{
    "ceiling", "floor", "wall", "beam", "column", "window", "door",
    "table", "chair", "sofa", "bookcase", "board", "clutter"};

/// Id of a category name; unknown names (e.g. "stairs") map to clutter.
int s3dis_category_id(std::string_view name);

/// Reads a room in "x y z r g b" text form.
///
/// `path` is either a text file or a room directory holding an `Annotations/` folder with one
/// file per object named "<category>_<n>.txt". For a directory, labels come from the file names
/// and objects are concatenated in file-name order. For a file, `with_labels` requires a 7th
/// integer label column; without it exactly 6 columns are expected.
///
/// Throws ParseError (with the 1-based line number) on malformed or non-finite data and on an
/// empty input.
PointCloud parse_s3dis_room(const std::filesystem::path& path, bool with_labels);

/// Parses S3DIS-style text already in memory. `source` is used in error messages only.
PointCloud parse_s3dis_text(std::string_view text, std::string room_id, bool with_labels,
                            std::string_view source = "<memory>", std::optional<int> fixed_label = std::nullopt);

/// ASCII or binary_little_endian PLY with a vertex element holding x, y, z and optionally
/// red, green, blue and label. Missing colour reads as (0, 0, 0).
PointCloud parse_ply(const std::filesystem::path& path);
PointCloud parse_ply_bytes(std::string_view bytes, std::string room_id, std::string_view source = "<memory>");

/// Dispatches on `format` ("s3dis" or "ply"); an empty format picks by extension.
PointCloud load_cloud(const std::filesystem::path& path, std::string_view format, bool with_labels);

/// One point per line, "x y z r g b [label]" with six decimals for coordinates.
std::string format_partial_set(const PointCloud& cloud);

/// Writes format_partial_set(cloud). Throws Error on an empty cloud or an unwritable path.
void write_partial_set(const PointCloud& cloud, const std::filesystem::path& path);

/// "<room_id>_v<perspective_id>_y<yaw>_p<pitch>.txt"
std::string partial_set_filename(std::string_view room_id, int perspective_id, double yaw_deg, double pitch_deg);

/// Area name ("Area_3") found among the path components, or empty.
std::string infer_area(const std::filesystem::path& path);

struct ManifestEntry {
  int perspective_id = 0;
  Vec3 viewpoint = Vec3::Zero();
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  std::size_t point_count = 0;
  std::string file_path;  // relative to the manifest's directory
};

struct MultiviewManifest {
  std::string room_id;
  std::string area;
  std::string source_path;
  std::size_t original_count = 0;
  std::vector<ManifestEntry> entries;
  std::string generation_config_hash;
  std::uint64_t seed = 0;
  std::size_t min_points = 0;
  /// Effective generation config, echoed verbatim.
  nlohmann::json config = nlohmann::json::object();
  /// |union of partial sets| / |original|.
  double coverage = 0.0;

  /// Throws Error when an entry is below min_points or ids repeat.
  void validate() const;
  std::size_t partial_points() const;
};

/// Canonical JSON: sorted keys, entries sorted by perspective_id, plus a "totals" object.
nlohmann::json to_json(const MultiviewManifest& manifest);
MultiviewManifest manifest_from_json(const nlohmann::json& j);

/// Canonical text (2-space indent, trailing newline) of to_json(manifest).
std::string format_manifest(const MultiviewManifest& manifest);
void write_manifest(const MultiviewManifest& manifest, const std::filesystem::path& path);
/// Throws ParseError naming the path on unreadable or malformed manifests.
MultiviewManifest read_manifest(const std::filesystem::path& path);

/// Manifest files ("*.manifest.json") under `dir`, sorted by path.
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mvrep::io
