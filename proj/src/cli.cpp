#include "mvrep/cli.hpp"

#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvrep/critical.hpp"
#include "mvrep/hpr.hpp"
#include "mvrep/io.hpp"
#include "mvrep/pipeline.hpp"
#include "mvrep/synthetic.hpp"

namespace mvrep::cli {

namespace fs = std::filesystem;

namespace {

// Flat "key=value" files carry no section, so their keys are routed to the subcommand being run.
class SubcommandConfig : public CLI::ConfigBase {
 public:
  explicit SubcommandConfig(const CLI::App* root) : root_(root) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigBase::from_config(input);
    const auto subs = root_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty()) item.parents.push_back(subs.front()->get_name());
    return items;
  }

 private:
  const CLI::App* root_;
};

struct InputOptions {
  std::string path;
  std::string format;
  bool labels = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--input", path, "Room file or S3DIS room directory")->required();
    cmd->add_option("--format", format, "s3dis or ply; inferred from the extension when omitted")
        ->check(CLI::IsMember({"s3dis", "ply"}));
    cmd->add_flag("--labels", labels, "Text input carries a 7th label column");
  }

  PointCloud load() const { return io::load_cloud(path, format, labels); }
};

Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

int cmd_generate(const InputOptions& input, pipeline::PipelineConfig config, const std::string& out_dir,
                 std::string area, std::size_t jobs, std::ostream& out, std::ostream& err) {
  config.validate();
  const PointCloud cloud = input.load();
  if (area.empty()) area = io::infer_area(input.path);
  const auto result = pipeline::generate_multiview(cloud, config, jobs, input.path, area);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  const fs::path manifest = pipeline::write_multiview(result, out_dir);
  out << fmt::format("{}: {} of {} perspectives kept, coverage {:.3f}, manifest {}\n", cloud.room_id,
                     result.partials.size(), result.perspectives_evaluated, result.coverage, manifest.string());
  return kOk;
}

int cmd_hpr(const InputOptions& input, const std::vector<double>& viewpoint, double radius_factor,
            std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  if (!(radius_factor > 0.0)) throw ConfigError(fmt::format("radius factor must be positive, got {}", radius_factor));
  const PointCloud cloud = input.load();
  const IndexSet visible = hpr::visible_points(cloud, to_vec3(viewpoint), radius_factor, seed);
  io::write_file(out_path, io::format_partial_set(cloud.subset(visible, cloud.room_id)));
  out << fmt::format("{} of {} points visible\n", visible.size(), cloud.size());
  return kOk;
}

int cmd_fuse(const std::string& manifest_dir, const pipeline::FusionRecipe& recipe, std::uint64_t seed,
             const std::string& out_path, std::ostream& out) {
  const auto manifests = io::find_manifests(manifest_dir);
  if (manifests.empty()) throw ParseError(fmt::format("no manifests under '{}'", manifest_dir));
  const auto areas = pipeline::collect_area_sources(manifests);
  const auto list = pipeline::fuse_training_set(areas, recipe, seed);
  std::string text;
  for (const auto& line : list) text += line + '\n';
  io::write_file(out_path, text);
  out << fmt::format("{} training sources from {} areas\n", list.size(), areas.size());
  return kOk;
}

int cmd_critical(const InputOptions& input, std::size_t k, std::uint64_t seed, std::size_t trials,
                 const std::string& out_path, std::ostream& out) {
  if (k == 0) throw ConfigError("--k must be positive");
  const PointCloud cloud = input.load();
  if (cloud.empty()) throw GeometryError("empty cloud");
  const auto bank = critical::FeatureBank::radial(k, seed, bounding_box(cloud));
  const auto report = critical::verify_subset_invariance(cloud, bank, trials, seed);
  const auto& cs = report.critical;

  nlohmann::json trial_json = nlohmann::json::array();
  for (const auto& t : report.trials) {
    nlohmann::json j{{"size", t.size}, {"equal", t.equal}};
    if (!t.equal) j.update({{"dimension", t.dimension}, {"expected", t.expected}, {"actual", t.actual}});
    trial_json.push_back(std::move(j));
  }
  const nlohmann::json doc{{"input", input.path},
                           {"n", cloud.size()},
                           {"k", cs.k},
                           {"seed", seed},
                           {"u", cs.u},
                           {"argmax", cs.argmax},
                           {"critical_indices", cs.critical_indices},
                           {"critical_size", cs.critical_indices.size()},
                           {"upper_set", cs.upper_set_predicate()},
                           {"subset_invariance",
                            {{"trials", trial_json}, {"failures", report.failures}, {"passed", report.passed()}}}};
  io::write_file(out_path, doc.dump(2) + '\n');
  out << fmt::format("|C_S| = {} (K = {}), subset invariance {} trials, {} failures\n", cs.critical_indices.size(),
                     cs.k, report.trials.size(), report.failures);
  return report.passed() ? kOk : kInputError;
}

int cmd_stats(const std::string& manifest_dir, std::ostream& out) {
  const auto manifests = io::find_manifests(manifest_dir);
  if (manifests.empty()) throw ParseError(fmt::format("no manifests under '{}'", manifest_dir));
  out << format_stats_table(collect_stats(manifests));
  return kOk;
}

int cmd_synth(const synthetic::RoomSpec& spec, const std::string& out_path, std::ostream& out) {
  if (!(spec.width > 0 && spec.depth > 0 && spec.height > 0)) throw ConfigError("room dimensions must be positive");
  if (spec.points == 0) throw ConfigError("--points must be positive");
  const PointCloud room = synthetic::make_room(spec);
  io::write_file(out_path, io::format_partial_set(room));
  out << fmt::format("{} points written to {}\n", room.size(), out_path);
  return kOk;
}

}  // namespace

std::vector<AreaStats> collect_stats(const std::vector<fs::path>& manifests) {
  std::map<std::string, AreaStats> by_area;
  for (const auto& path : manifests) {
    const io::MultiviewManifest m = io::read_manifest(path);
    const std::string area = m.area.empty() ? "unassigned" : m.area;
    AreaStats& row = by_area[area];
    row.area = area;
    ++row.originals;
    row.partial_sets += m.entries.size();
  }
  std::vector<AreaStats> rows;
  for (auto& [_, row] : by_area) rows.push_back(row);
  return rows;
}

std::string format_stats_table(const std::vector<AreaStats>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.area.size());
  std::string text = fmt::format("{:<{}}  {:>8}  {:>8}\n", "Area", width, "Original", "MV");
  AreaStats total{"Total", 0, 0};
  for (const auto& r : rows) {
    text += fmt::format("{:<{}}  {:>8}  {:>8}\n", r.area, width, r.originals, r.partial_sets);
    total.originals += r.originals;
    total.partial_sets += r.partial_sets;
  }
  text += fmt::format("{:<{}}  {:>8}  {:>8}\n", total.area, width, total.originals, total.partial_sets);
  return text;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view partial point set generation and critical-set analysis", "mvrep"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Flat key=value file; keys are flag names without dashes")->envname("MVREP_CONFIG");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));

  InputOptions input;
  pipeline::PipelineConfig config;
  std::string out_path, area, manifest_dir;
  std::size_t jobs = 1;

  auto* gen = app.add_subcommand("generate", "Cull, remove hidden points and threshold every perspective");
  input.add(gen);
  gen->add_option("--out", out_path, "Output directory")->required();
  gen->add_option("--area", area, "Area name for the manifest; inferred from an Area_* path component");
  gen->add_option("--hfov", config.fov.hfov_deg, "Horizontal field of view, degrees")->capture_default_str();
  gen->add_option("--vfov", config.fov.vfov_deg, "Vertical field of view, degrees")->capture_default_str();
  gen->add_option("--min-depth", config.fov.min_depth)->capture_default_str();
  gen->add_option("--max-depth", config.fov.max_depth)->capture_default_str();
  gen->add_option("--min-points", config.min_points, "Smallest partial set kept")->capture_default_str();
  gen->add_option("--spacing", config.grid.spacing, "Viewpoint grid spacing")->capture_default_str();
  gen->add_option("--camera-height", config.grid.camera_height)->capture_default_str();
  gen->add_option("--yaw-steps", config.grid.yaw_steps)->delimiter(',')->capture_default_str();
  gen->add_option("--pitch-steps", config.grid.pitch_steps)->delimiter(',')->capture_default_str();
  gen->add_option("--include-boundary", config.grid.include_boundary)->capture_default_str();
  gen->add_option("--radius-factor", config.radius_factor)->capture_default_str();
  gen->add_option("--coverage-target", config.coverage_target)->capture_default_str();
  gen->add_option("--seed", config.seed)->capture_default_str();
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<double> viewpoint;
  double radius_factor = hpr::kDefaultRadiusFactor;
  std::uint64_t seed = 0;
  auto* hpr_cmd = app.add_subcommand("hpr", "Visible subset of a cloud from one viewpoint");
  input.add(hpr_cmd);
  hpr_cmd->add_option("--viewpoint", viewpoint, "x,y,z")->delimiter(',')->expected(3)->required();
  hpr_cmd->add_option("--radius-factor", radius_factor)->capture_default_str();
  hpr_cmd->add_option("--seed", seed)->capture_default_str();
  hpr_cmd->add_option("--out", out_path, "Output text file")->required();

  pipeline::FusionRecipe recipe;
  bool no_originals = false;
  auto* fuse = app.add_subcommand("fuse", "Training list of originals plus sampled partial sets per area");
  fuse->add_option("--manifests", manifest_dir, "Directory searched for *.manifest.json")->required();
  fuse->add_option("--partial-per-area", recipe.partial_per_area)->required();
  fuse->add_flag("--no-originals", no_originals);
  fuse->add_option("--seed", seed)->capture_default_str();
  fuse->add_option("--out", out_path, "Output list file")->required();

  std::size_t k = 64, trials = 50;
  auto* crit = app.add_subcommand("critical", "Critical point set and subset invariance report");
  input.add(crit);
  crit->add_option("--k", k, "Embedding dimension")->capture_default_str();
  crit->add_option("--seed", seed)->capture_default_str();
  crit->add_option("--trials", trials)->capture_default_str();
  crit->add_option("--out", out_path, "Report JSON")->required();

  auto* stats = app.add_subcommand("stats", "Per-area counts of rooms and partial sets");
  stats->add_option("--manifests", manifest_dir)->required();

  synthetic::RoomSpec room;
  bool no_furniture = false;
  auto* synth = app.add_subcommand("synth", "Write a labelled synthetic room");
  synth->add_option("--width", room.width)->capture_default_str();
  synth->add_option("--depth", room.depth)->capture_default_str();
  synth->add_option("--height", room.height)->capture_default_str();
  synth->add_option("--points", room.points)->capture_default_str();
  synth->add_option("--seed", room.seed)->capture_default_str();
  synth->add_flag("--no-furniture", no_furniture);
  synth->add_option("--out", out_path, "Output text file (x y z r g b label)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return cmd_generate(input, config, out_path, area, jobs, out, err);
    if (*hpr_cmd) return cmd_hpr(input, viewpoint, radius_factor, seed, out_path, out);
    if (*fuse) {
      recipe.include_originals = !no_originals;
      return cmd_fuse(manifest_dir, recipe, seed, out_path, out);
    }
    if (*crit) return cmd_critical(input, k, seed, trials, out_path, out);
    if (*stats) return cmd_stats(manifest_dir, out);
    if (*synth) {
      room.furniture = !no_furniture;
      return cmd_synth(room, out_path, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"mvrep"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mvrep::cli
