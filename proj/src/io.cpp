#include "mvrep/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace mvrep::io {

namespace fs = std::filesystem;

int s3dis_category_id(std::string_view name) {
  for (std::size_t i = 0; i < kS3disCategories.size(); ++i)
    if (kS3disCategories[i] == name) return static_cast<int>(i);
  return static_cast<int>(kS3disCategories.size()) - 1;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

// Splits on whitespace into at most `max` fields; returns the field count found (may exceed max).
std::size_t split_fields(std::string_view line, std::array<std::string_view, 8>& out) {
  std::size_t n = 0, i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (n < out.size()) out[n] = line.substr(i, j - i);
    ++n;
    i = j;
  }
  return n;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string stem_of(const fs::path& p) { return p.stem().string(); }

}  // namespace

PointCloud parse_s3dis_text(std::string_view text, std::string room_id, bool with_labels, std::string_view source,
                            std::optional<int> fixed_label) {
  PointCloud cloud;
  cloud.room_id = std::move(room_id);
  const std::size_t expected = (with_labels && !fixed_label) ? 7 : 6;
  std::array<std::string_view, 8> f;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::size_t n = split_fields(line, f);
    if (n == 0) continue;
    if (n != expected)
      throw ParseError(fmt::format("{}:{}: expected {} fields, found {}", source, line_no, expected, n), line_no);
    Point p;
    for (int a = 0; a < 3; ++a) {
      double v;
      if (!parse_number(f[a], v))
        throw ParseError(fmt::format("{}:{}: cannot parse coordinate '{}'", source, line_no, f[a]), line_no);
      if (!std::isfinite(v))
        throw ParseError(fmt::format("{}:{}: non-finite coordinate '{}'", source, line_no, f[a]), line_no);
      p.position[a] = v;
    }
    std::array<int, 3> rgb{};
    for (int c = 0; c < 3; ++c) {
      if (!parse_number(f[3 + c], rgb[c]) || rgb[c] < 0 || rgb[c] > 255)
        throw ParseError(fmt::format("{}:{}: colour '{}' is not an integer in [0, 255]", source, line_no, f[3 + c]),
                         line_no);
    }
    p.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]), static_cast<std::uint8_t>(rgb[2])};
    if (fixed_label) {
      p.label = fixed_label;
    } else if (with_labels) {
      int label;
      if (!parse_number(f[6], label) || label < 0)
        throw ParseError(fmt::format("{}:{}: label '{}' is not a non-negative integer", source, line_no, f[6]), line_no);
      p.label = label;
    }
    cloud.points.push_back(p);
  }
  if (cloud.points.empty()) throw ParseError(fmt::format("{}: no points", source));
  cloud.update_bounds();
  return cloud;
}

PointCloud parse_s3dis_room(const fs::path& path, bool with_labels) {
  if (fs::is_directory(path)) {
    fs::path ann = path / "Annotations";
    if (!fs::is_directory(ann)) ann = path;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(ann))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError(fmt::format("{}: no annotation files", ann.string()));
    PointCloud room;
    room.room_id = path.filename().empty() ? path.parent_path().filename().string() : path.filename().string();
    for (const fs::path& file : files) {
      std::string stem = stem_of(file);
      const auto us = stem.rfind('_');
      const std::string category = us == std::string::npos ? stem : stem.substr(0, us);
      PointCloud part = parse_s3dis_text(read_file(file), stem, true, file.string(), s3dis_category_id(category));
      room.points.insert(room.points.end(), part.points.begin(), part.points.end());
    }
    room.update_bounds();
    return room;
  }
  return parse_s3dis_text(read_file(path), stem_of(path), with_labels, path.string());
}

namespace {

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::kInt8;
  if (name == "uchar" || name == "uint8") return PlyType::kUInt8;
  if (name == "short" || name == "int16") return PlyType::kInt16;
  if (name == "ushort" || name == "uint16") return PlyType::kUInt16;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUInt32;
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double read_binary(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8: return read_le<std::int8_t>(p);
    case PlyType::kUInt8: return read_le<std::uint8_t>(p);
    case PlyType::kInt16: return read_le<std::int16_t>(p);
    case PlyType::kUInt16: return read_le<std::uint16_t>(p);
    case PlyType::kInt32: return read_le<std::int32_t>(p);
    case PlyType::kUInt32: return read_le<std::uint32_t>(p);
    case PlyType::kFloat32: return read_le<float>(p);
    case PlyType::kFloat64: return read_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::string property_list(const PlyElement& e) {
  std::string s;
  for (const auto& p : e.props) {
    if (!s.empty()) s += ", ";
    s += p.is_list ? "list " + p.name : p.name;
  }
  return s.empty() ? "(none)" : s;
}

}  // namespace

PointCloud parse_ply_bytes(std::string_view bytes, std::string room_id, std::string_view source) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= bytes.size()) return std::nullopt;
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = std::min(end + 1, bytes.size());
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };
  auto fail = [&](const std::string& msg) {
    return ParseError(fmt::format("{}:{}: {}", source, line_no, msg), line_no);
  };

  auto magic = next_line();
  if (!magic || *magic != "ply") throw fail("missing 'ply' magic");
  bool binary = false;
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (auto line = next_line()) {
    std::istringstream ss{std::string(*line)};
    std::string kw;
    ss >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      std::string fmt_name, version;
      ss >> fmt_name >> version;
      if (fmt_name == "ascii") binary = false;
      else if (fmt_name == "binary_little_endian") binary = true;
      else throw fail("unsupported PLY format '" + fmt_name + "'");
    } else if (kw == "element") {
      PlyElement e;
      long long count = -1;
      ss >> e.name >> count;
      if (e.name.empty() || count < 0) throw fail("malformed element line");
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (elements.empty()) throw fail("property before any element");
      PlyProperty p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type >> p.name;
        p.is_list = true;
        if (!ply_type(count_type) || !ply_type(item_type)) throw fail("unknown list property type");
        p.type = *ply_type(item_type);
      } else {
        ss >> p.name;
        auto t = ply_type(type);
        if (!t) throw fail("unknown property type '" + type + "'");
        p.type = *t;
      }
      elements.back().props.push_back(p);
    } else if (kw == "end_header") {
      header_done = true;
      break;
    } else {
      throw fail("unexpected header keyword '" + kw + "'");
    }
  }
  if (!header_done) throw fail("missing end_header");

  const auto vit = std::find_if(elements.begin(), elements.end(), [](const PlyElement& e) { return e.name == "vertex"; });
  if (vit == elements.end()) throw ParseError(fmt::format("{}: no vertex element", source));
  const PlyElement& vertex = *vit;
  auto index_of = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < vertex.props.size(); ++i)
      if (vertex.props[i].name == name && !vertex.props[i].is_list) return static_cast<int>(i);
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int ir = index_of("red"), ig = index_of("green"), ib = index_of("blue"), il = index_of("label");
  const bool has_list = std::any_of(vertex.props.begin(), vertex.props.end(), [](const PlyProperty& p) { return p.is_list; });
  if (ix < 0 || iy < 0 || iz < 0 || has_list)
    throw ParseError(fmt::format("{}: unsupported vertex layout, found properties: {}", source, property_list(vertex)));
  const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud;
  cloud.room_id = std::move(room_id);
  cloud.points.reserve(vertex.count);
  std::vector<double> values(vertex.props.size());
  auto emit = [&](std::size_t v) {
    Point p;
    p.position = Vec3(values[ix], values[iy], values[iz]);
    if (!p.position.allFinite()) throw ParseError(fmt::format("{}: vertex {} has a non-finite coordinate", source, v));
    if (has_color) {
      auto channel = [&](int i) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(values[i]), 0L, 255L));
      };
      p.color = {channel(ir), channel(ig), channel(ib)};
    }
    if (il >= 0) p.label = static_cast<int>(values[il]);
    cloud.points.push_back(p);
  };

  if (!binary) {
    for (const PlyElement& e : elements) {
      const bool is_vertex = &e == &vertex;
      for (std::size_t r = 0; r < e.count; ++r) {
        auto line = next_line();
        while (line && line->find_first_not_of(" \t") == std::string_view::npos) line = next_line();
        if (!line)
          throw fail(fmt::format("element '{}' declares {} rows but the data ends after {}", e.name, e.count, r));
        if (!is_vertex) continue;
        std::vector<std::string_view> tokens;
        std::string_view rest = *line;
        while (true) {
          const auto b = rest.find_first_not_of(" \t");
          if (b == std::string_view::npos) break;
          rest.remove_prefix(b);
          const auto end = rest.find_first_of(" \t");
          tokens.push_back(rest.substr(0, end));
          if (end == std::string_view::npos) break;
          rest.remove_prefix(end);
        }
        if (tokens.size() != vertex.props.size())
          throw fail(fmt::format("vertex row has {} values, expected {}", tokens.size(), vertex.props.size()));
        for (std::size_t i = 0; i < tokens.size(); ++i)
          if (!parse_number(tokens[i], values[i])) throw fail(fmt::format("cannot parse '{}'", tokens[i]));
        emit(r);
      }
      if (is_vertex) break;
    }
  } else {
    for (const PlyElement& e : elements) {
      const bool is_vertex = &e == &vertex;
      if (std::any_of(e.props.begin(), e.props.end(), [](const PlyProperty& p) { return p.is_list; })) {
        if (is_vertex) break;
        throw ParseError(fmt::format("{}: cannot skip list element '{}' before vertices", source, e.name));
      }
      std::size_t stride = 0;
      for (const auto& p : e.props) stride += ply_size(p.type);
      const std::size_t need = stride * e.count;
      if (bytes.size() - pos < need)
        throw ParseError(fmt::format("{}: element '{}' declares {} rows but the data holds only {}", source, e.name,
                                     e.count, stride ? (bytes.size() - pos) / stride : 0));
      if (is_vertex) {
        for (std::size_t r = 0; r < e.count; ++r) {
          const char* row = bytes.data() + pos + r * stride;
          std::size_t off = 0;
          for (std::size_t i = 0; i < e.props.size(); ++i) {
            values[i] = read_binary(e.props[i].type, row + off);
            off += ply_size(e.props[i].type);
          }
          emit(r);
        }
        break;
      }
      pos += need;
    }
  }
  if (cloud.points.empty()) throw ParseError(fmt::format("{}: no points", source));
  cloud.update_bounds();
  return cloud;
}

PointCloud parse_ply(const fs::path& path) {
  return parse_ply_bytes(read_file(path), stem_of(path), path.string());
}

PointCloud load_cloud(const fs::path& path, std::string_view format, bool with_labels) {
  std::string f(format);
  if (f.empty()) f = path.extension() == ".ply" ? "ply" : "s3dis";
  if (f == "ply") return parse_ply(path);
  if (f == "s3dis") return parse_s3dis_room(path, with_labels);
  throw ConfigError(fmt::format("unknown input format '{}'", f));
}

std::string format_partial_set(const PointCloud& cloud) {
  fmt::memory_buffer buf;
  for (const Point& p : cloud.points) {
    fmt::format_to(std::back_inserter(buf), "{:.6f} {:.6f} {:.6f} {} {} {}", p.position.x(), p.position.y(),
                   p.position.z(), p.color.r, p.color.g, p.color.b);
    if (p.label) fmt::format_to(std::back_inserter(buf), " {}", *p.label);
    buf.push_back('\n');
  }
  return fmt::to_string(buf);
}

void write_partial_set(const PointCloud& cloud, const fs::path& path) {
  if (cloud.empty()) throw Error(fmt::format("refusing to write empty partial set '{}'", path.string()));
  write_file(path, format_partial_set(cloud));
}

std::string partial_set_filename(std::string_view room_id, int perspective_id, double yaw_deg, double pitch_deg) {
  return fmt::format("{}_v{}_y{}_p{}.txt", room_id, perspective_id, yaw_deg, pitch_deg);
}

std::string infer_area(const fs::path& path) {
  std::string area;
  for (const auto& part : fs::absolute(path).lexically_normal()) {
    const std::string s = part.string();
    if (s.rfind("Area_", 0) == 0) area = s;
  }
  return area;
}

void MultiviewManifest::validate() const {
  std::set<int> ids;
  for (const auto& e : entries) {
    if (e.point_count < min_points)
      throw Error(fmt::format("manifest entry {} has {} points, below the threshold {}", e.perspective_id,
                              e.point_count, min_points));
    if (!ids.insert(e.perspective_id).second)
      throw Error(fmt::format("duplicate perspective id {} in manifest", e.perspective_id));
  }
}

std::size_t MultiviewManifest::partial_points() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.point_count;
  return total;
}

nlohmann::json to_json(const MultiviewManifest& m) {
  using nlohmann::json;
  std::vector<ManifestEntry> entries = m.entries;
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.perspective_id < b.perspective_id; });
  json arr = json::array();
  for (const auto& e : entries)
    arr.push_back({{"perspective_id", e.perspective_id},
                   {"viewpoint", {e.viewpoint.x(), e.viewpoint.y(), e.viewpoint.z()}},
                   {"yaw_deg", e.yaw_deg},
                   {"pitch_deg", e.pitch_deg},
                   {"point_count", e.point_count},
                   {"file_path", e.file_path}});
  return {{"room_id", m.room_id},
          {"area", m.area},
          {"source_path", m.source_path},
          {"original_count", m.original_count},
          {"entries", std::move(arr)},
          {"generation_config_hash", m.generation_config_hash},
          {"seed", m.seed},
          {"min_points", m.min_points},
          {"config", m.config},
          {"coverage", m.coverage},
          {"totals", {{"original_sets", 1}, {"partial_sets", entries.size()}, {"partial_points", m.partial_points()}}}};
}

MultiviewManifest manifest_from_json(const nlohmann::json& j) {
  MultiviewManifest m;
  m.room_id = j.at("room_id").get<std::string>();
  m.area = j.value("area", std::string{});
  m.source_path = j.value("source_path", std::string{});
  m.original_count = j.at("original_count").get<std::size_t>();
  m.generation_config_hash = j.at("generation_config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.min_points = j.value("min_points", std::size_t{0});
  m.config = j.value("config", nlohmann::json::object());
  m.coverage = j.value("coverage", 0.0);
  for (const auto& e : j.at("entries")) {
    ManifestEntry entry;
    entry.perspective_id = e.at("perspective_id").get<int>();
    const auto& v = e.at("viewpoint");
    if (!v.is_array() || v.size() != 3) throw Error("manifest viewpoint must be a 3-vector");
    entry.viewpoint = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    entry.yaw_deg = e.at("yaw_deg").get<double>();
    entry.pitch_deg = e.at("pitch_deg").get<double>();
    entry.point_count = e.at("point_count").get<std::size_t>();
    entry.file_path = e.at("file_path").get<std::string>();
    m.entries.push_back(std::move(entry));
  }
  return m;
}

std::string format_manifest(const MultiviewManifest& manifest) {
  manifest.validate();
  return to_json(manifest).dump(2) + "\n";
}

void write_manifest(const MultiviewManifest& manifest, const fs::path& path) {
  write_file(path, format_manifest(manifest));
}

MultiviewManifest read_manifest(const fs::path& path) {
  try {
    MultiviewManifest m = manifest_from_json(nlohmann::json::parse(read_file(path)));
    m.validate();
    return m;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(fmt::format("{}: invalid manifest: {}", path.string(), e.what()));
  }
}

std::vector<fs::path> find_manifests(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 14 && name.ends_with(".manifest.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mvrep::io
