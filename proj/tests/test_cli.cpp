#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mvrep/cli.hpp"
#include "mvrep/io.hpp"
#include "mvrep/oracles.hpp"

namespace fs = std::filesystem;
using mvrep::Vec3;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mvrep_test_cli_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run mvrep_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = mvrep::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

void write_room_manifest(const fs::path& dir, const std::string& area, const std::string& room, int partials) {
  mvrep::io::MultiviewManifest m;
  m.room_id = room;
  m.area = area;
  m.source_path = area + "/" + room + ".txt";
  for (int k = 0; k < partials; ++k)
    m.entries.push_back({k, Vec3::Zero(), 0, 0, 1, mvrep::io::partial_set_filename(room, k, 0, 0)});
  fs::create_directories(dir);
  mvrep::io::write_manifest(m, dir / (room + ".manifest.json"));
}

// One synthetic room shared by the generate cases.
const TempDir& room_dir() {
  static const TempDir dir = [] {
    TempDir d("room");
    fs::create_directories(d.path / "Area_5");
    const auto r = mvrep_run({"synth", "--points", "30000", "--out", d / "Area_5/lobby.txt"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("generate writes partial sets and a manifest") {
  const auto& room = room_dir();
  TempDir out("gen");
  const auto r = mvrep_run({"generate", "--input", room / "Area_5/lobby.txt", "--labels", "--out", out / "o",
                            "--min-points", "2000"});
  REQUIRE(r.code == 0);
  const auto m = mvrep::io::read_manifest(out.path / "o" / "lobby.manifest.json");
  CHECK(m.area == "Area_5");
  CHECK(m.config["min-points"] == 2000);
  CHECK(m.config["hfov"] == 70.0);
  REQUIRE(!m.entries.empty());
  for (const auto& e : m.entries) {
    CHECK(e.point_count >= 2000);
    const auto part = mvrep::io::parse_s3dis_room(out.path / "o" / e.file_path, true);
    CHECK(part.size() == e.point_count);
  }
}

TEST_CASE("generate defaults and config errors") {
  const auto& room = room_dir();
  TempDir out("gen2");
  const auto r = mvrep_run({"generate", "--input", room / "Area_5/lobby.txt", "--labels", "--out", out / "o"});
  CHECK(r.code == 0);
  CHECK(contains(r.err, "warning"));
  CHECK(mvrep::io::read_manifest(out.path / "o" / "lobby.manifest.json").config["min-points"] == 40000);

  const auto bad = mvrep_run({"generate", "--input", room / "Area_5/lobby.txt", "--labels", "--out", out / "x",
                              "--min-depth", "5", "--max-depth", "4"});
  CHECK(bad.code == 2);
  CHECK(contains(bad.err, "depth"));
  CHECK(mvrep_run({"generate", "--input", room / "missing.txt", "--out", out / "x"}).code == 1);
  CHECK(mvrep_run({"generate", "--input", room / "Area_5/lobby.txt", "--out", out / "x"}).code == 1);
  CHECK(mvrep_run({"generate", "--out", out / "x"}).code == 2);
  CHECK(mvrep_run({"generate", "--input", room / "Area_5/lobby.txt", "--out", out / "x", "--jobs", "0"}).code == 2);
  CHECK(mvrep_run({"frobnicate"}).code == 2);
  CHECK(mvrep_run({}).code == 2);
  CHECK(mvrep_run({"--help"}).code == 0);
}

TEST_CASE("config file, environment and flag precedence") {
  const auto& room = room_dir();
  TempDir out("cfg");
  mvrep::io::write_file(out.path / "run.cfg", "labels=true\nmin-points=1500\nhfov=80\nyaw-steps=0,90,180,270\n");
  auto r = mvrep_run({"generate", "--config", out / "run.cfg", "--input", room / "Area_5/lobby.txt", "--out",
                      out / "a", "--hfov", "75"});
  REQUIRE(r.code == 0);
  auto m = mvrep::io::read_manifest(out.path / "a" / "lobby.manifest.json");
  CHECK(m.config["min-points"] == 1500);
  CHECK(m.config["hfov"] == 75.0);
  CHECK(m.config["yaw-steps"].size() == 4);

  ::setenv("MVREP_CONFIG", (out / "run.cfg").c_str(), 1);
  r = mvrep_run({"generate", "--input", room / "Area_5/lobby.txt", "--out", out / "b"});
  ::unsetenv("MVREP_CONFIG");
  REQUIRE(r.code == 0);
  m = mvrep::io::read_manifest(out.path / "b" / "lobby.manifest.json");
  CHECK(m.config["hfov"] == 80.0);

  mvrep::io::write_file(out.path / "bad.cfg", "no-such-flag=1\n");
  CHECK(mvrep_run({"generate", "--config", out / "bad.cfg", "--input", room / "Area_5/lobby.txt", "--out", out / "c"})
            .code == 2);
}

TEST_CASE("generate output does not depend on --jobs") {
  const auto& room = room_dir();
  TempDir out("jobs");
  const std::string input = room / "Area_5/lobby.txt";
  REQUIRE(mvrep_run({"generate", "--input", input, "--labels", "--out", out / "j1", "--min-points", "2000"}).code == 0);
  REQUIRE(mvrep_run({"generate", "--input", input, "--labels", "--out", out / "j3", "--min-points", "2000", "--jobs",
                     "3"})
              .code == 0);
  for (const auto& entry : fs::directory_iterator(out.path / "j1"))
    CHECK(mvrep::io::read_file(entry.path()) == mvrep::io::read_file(out.path / "j3" / entry.path().filename()));
}

TEST_CASE("hpr subcommand") {
  TempDir dir("hpr");
  mvrep::io::write_file(dir.path / "one.txt", "1.000000 2.000000 3.000000 4 5 6\n");
  REQUIRE(mvrep_run({"hpr", "--input", dir / "one.txt", "--viewpoint", "0,0,0", "--out", dir / "one_out.txt"}).code ==
          0);
  CHECK(mvrep::io::read_file(dir.path / "one_out.txt") == mvrep::io::read_file(dir.path / "one.txt"));

  const auto missing = mvrep_run({"hpr", "--input", dir / "one.txt", "--out", dir / "x.txt"});
  CHECK(missing.code == 2);
  const auto coincide = mvrep_run({"hpr", "--input", dir / "one.txt", "--viewpoint", "1,2,3", "--out", dir / "x.txt"});
  CHECK(coincide.code == 1);
  CHECK(contains(coincide.err, "point 0"));

  const auto fx = mvrep::oracles::cap_visibility_sphere(5000, 1.0, 3.0, 0);
  mvrep::PointCloud sphere;
  for (const Vec3& p : fx.points) sphere.points.push_back({p, {}, std::nullopt});
  mvrep::io::write_partial_set(sphere, dir.path / "sphere.txt");
  REQUIRE(mvrep_run({"hpr", "--input", dir / "sphere.txt", "--viewpoint", "0,0,3", "--out", dir / "cap.txt"}).code ==
          0);
  const auto cap = mvrep::io::parse_s3dis_room(dir.path / "cap.txt", false);
  CHECK(std::abs(static_cast<double>(cap.size()) / 5000.0 - 1.0 / 3.0) < 0.04);
  for (const auto& p : cap.points) CHECK(p.position.z() > 0.2);
}

TEST_CASE("fuse subcommand") {
  TempDir dir("fuse");
  for (int i = 0; i < 44; ++i) write_room_manifest(dir.path / "m" / "Area_1", "Area_1", "r" + std::to_string(i), 8);
  auto r = mvrep_run({"fuse", "--manifests", dir / "m", "--partial-per-area", "100", "--out", dir / "list.txt"});
  REQUIRE(r.code == 0);
  const std::string list = mvrep::io::read_file(dir.path / "list.txt");
  CHECK(std::count(list.begin(), list.end(), '\n') == 144);
  r = mvrep_run({"fuse", "--manifests", dir / "m", "--partial-per-area", "100", "--out", dir / "list2.txt"});
  CHECK(mvrep::io::read_file(dir.path / "list2.txt") == list);

  REQUIRE(mvrep_run({"fuse", "--manifests", dir / "m", "--partial-per-area", "0", "--out", dir / "base.txt"}).code == 0);
  const std::string base = mvrep::io::read_file(dir.path / "base.txt");
  CHECK(std::count(base.begin(), base.end(), '\n') == 44);
  REQUIRE(mvrep_run({"fuse", "--manifests", dir / "m", "--partial-per-area", "300", "--no-originals", "--out",
                     dir / "d0.txt"})
              .code == 0);
  const std::string d0 = mvrep::io::read_file(dir.path / "d0.txt");
  CHECK(std::count(d0.begin(), d0.end(), '\n') == 300);

  const auto over = mvrep_run({"fuse", "--manifests", dir / "m", "--partial-per-area", "400", "--out", dir / "x.txt"});
  CHECK(over.code == 1);
  CHECK(contains(over.err, "Area_1"));
}

TEST_CASE("critical subcommand") {
  TempDir dir("critical");
  REQUIRE(mvrep_run({"synth", "--points", "3000", "--seed", "4", "--out", dir / "room.txt"}).code == 0);
  REQUIRE(mvrep_run({"critical", "--input", dir / "room.txt", "--labels", "--out", dir / "a.json"}).code == 0);
  REQUIRE(mvrep_run({"critical", "--input", dir / "room.txt", "--labels", "--out", dir / "b.json"}).code == 0);
  const std::string a = mvrep::io::read_file(dir.path / "a.json");
  CHECK(a == mvrep::io::read_file(dir.path / "b.json"));
  const auto j = nlohmann::json::parse(a);
  CHECK(j["k"] == 64);
  CHECK(j["critical_size"].get<std::size_t>() <= 64);
  CHECK(j["critical_indices"].size() == j["critical_size"].get<std::size_t>());
  CHECK(j["u"].size() == 64);
  CHECK(j["subset_invariance"]["passed"] == true);
  CHECK(j["subset_invariance"]["trials"].size() == 50);

  REQUIRE(mvrep_run({"critical", "--input", dir / "room.txt", "--labels", "--k", "1", "--out", dir / "k1.json"}).code ==
          0);
  CHECK(nlohmann::json::parse(mvrep::io::read_file(dir.path / "k1.json"))["critical_size"] == 1);

  mvrep::io::write_file(dir.path / "empty.txt", "");
  CHECK(mvrep_run({"critical", "--input", dir / "empty.txt", "--out", dir / "e.json"}).code == 1);
}

TEST_CASE("stats subcommand") {
  TempDir dir("stats");
  for (int area = 1; area <= 6; ++area)
    for (int room = 0; room < area; ++room)
      write_room_manifest(dir.path / "six" / ("Area_" + std::to_string(area)), "Area_" + std::to_string(area),
                          "room" + std::to_string(room), 3);
  auto r = mvrep_run({"stats", "--manifests", dir / "six"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  REQUIRE(rows.size() == 8);
  CHECK(contains(rows[0], "Area"));
  CHECK(contains(rows[0], "Original"));
  CHECK(contains(rows[0], "MV"));
  CHECK(contains(rows[1], "Area_1"));
  CHECK(contains(rows[6], "Area_6"));
  CHECK(rows[7].rfind("Total", 0) == 0);
  std::istringstream total(rows[7]);
  std::string label;
  std::size_t originals = 0, mv = 0;
  total >> label >> originals >> mv;
  CHECK(originals == 21);
  CHECK(mv == 63);

  write_room_manifest(dir.path / "one", "Area_3", "solo", 2);
  r = mvrep_run({"stats", "--manifests", dir / "one"});
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);

  mvrep::io::write_file(dir.path / "one" / "broken.manifest.json", "{]");
  r = mvrep_run({"stats", "--manifests", dir / "one"});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "broken.manifest.json"));
  fs::create_directories(dir.path / "none");
  CHECK(mvrep_run({"stats", "--manifests", dir / "none"}).code == 1);
}

TEST_CASE("stats table layout") {
  const std::vector<mvrep::cli::AreaStats> rows{{"Area_1", 44, 1164}, {"Area_2", 39, 5}};
  CHECK(mvrep::cli::format_stats_table(rows) ==
        "Area    Original        MV\n"
        "Area_1        44      1164\n"
        "Area_2        39         5\n"
        "Total         83      1169\n");
}
