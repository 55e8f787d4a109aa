#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "salvox/meta_io.hpp"
#include "salvox/phantom.hpp"
#include "salvox/report.hpp"

using namespace salvox;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("SALVOX_CLI");
  REQUIRE_MESSAGE(p != nullptr, "SALVOX_CLI must point at the built binary");
  return p;
}

fs::path scratch() {
  auto p = fs::temp_directory_path() / "salvox_cli_tests";
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kBallSpec = R"({
  "dims": [48, 48, 48],
  "background": {"type": "constant", "value": 0},
  "regions": [
    {"shape": "ball", "center": [24, 24, 24], "radius": 8,
     "fill": {"type": "uniform", "levels": 64}}
  ],
  "rng_seed": 7
})";

}  // namespace

TEST_CASE("phantom subcommand writes volume and sidecar, deterministically") {
  const auto dir = scratch();
  write_text(dir / "spec.json", kBallSpec);

  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "p1.mhd").string()) == 0);
  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "p2.mhd").string()) == 0);

  const auto raw1 = read_file(dir / "p1.raw");
  const auto raw2 = read_file(dir / "p2.raw");
  CHECK(raw1 == raw2);
  CHECK(read_file(dir / "p1.gt.json") == read_file(dir / "p2.gt.json"));

  const Volume v = load_volume(dir / "p1.mhd");
  CHECK(v.nx() == 48);
}

TEST_CASE("phantom subcommand rejects invalid specs") {
  const auto dir = scratch();
  write_text(dir / "bad.json", R"({
    "dims": [32, 32, 32],
    "regions": [
      {"shape": "ball", "center": [8, 16, 16], "radius": 6, "fill": {"type":"uniform","levels":8}},
      {"shape": "ball", "center": [10, 16, 16], "radius": 6, "fill": {"type":"uniform","levels":8}}
    ]
  })");
  CHECK(run("phantom " + (dir / "bad.json").string() + " " + (dir / "bad.mhd").string()) == 1);
  CHECK(!fs::exists(dir / "bad.mhd"));
}

TEST_CASE("detect exit codes: success, nothing found, config error") {
  const auto dir = scratch();
  write_text(dir / "spec.json", kBallSpec);
  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "ball.mhd").string()) == 0);

  const std::string common =
      " --window 0:64 --bins 64 --seeds lattice:12 --scales 6,8 --k 5 --dedupe-radius 6 ";

  SUBCASE("finds the ball") {
    CHECK(run("detect --method shift --volume " + (dir / "ball.mhd").string() + common +
              "--out " + (dir / "out.json").string()) == 0);
    const auto report = json::parse(read_file(dir / "out.json"));
    CHECK(report.at("detections").size() >= 1);
    CHECK(report.at("header").at("volume_dims")[0] == 48);
  }

  SUBCASE("constant volume finds nothing") {
    Volume flat(32, 32, 32);
    save_volume(flat, dir / "flat.mhd");
    CHECK(run("detect --method shift --volume " + (dir / "flat.mhd").string() + common +
              "--out " + (dir / "flat_out.json").string()) == 2);
    const auto report = json::parse(read_file(dir / "flat_out.json"));
    CHECK(report.at("detections").empty());
  }

  SUBCASE("missing volume file") {
    CHECK(run("detect --method shift --volume " + (dir / "missing.mhd").string() + common +
              "--out " + (dir / "x.json").string()) == 1);
  }

  SUBCASE("bad method") {
    CHECK(run("detect --method bogus --volume " + (dir / "ball.mhd").string() + common +
              "--out " + (dir / "y.json").string()) == 1);
  }
}

TEST_CASE("detect reports are byte-identical apart from wall time") {
  const auto dir = scratch();
  write_text(dir / "spec.json", kBallSpec);
  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "ball.mhd").string()) == 0);

  const std::string cmd = "detect --method abmsod --volume " + (dir / "ball.mhd").string() +
                          " --window 0:64 --seeds lattice:12 --scales 6 --k 5 --rng-seed 3 --out ";
  REQUIRE(run(cmd + (dir / "r1.json").string()) == 0);
  REQUIRE(run(cmd + (dir / "r2.json").string()) == 0);

  auto r1 = json::parse(read_file(dir / "r1.json"));
  auto r2 = json::parse(read_file(dir / "r2.json"));
  r1["header"].erase("wall_time_ms");
  r2["header"].erase("wall_time_ms");
  CHECK(r1.dump() == r2.dump());
}

TEST_CASE("config file values are overridden by flags") {
  const auto dir = scratch();
  write_text(dir / "spec.json", kBallSpec);
  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "ball.mhd").string()) == 0);
  write_text(dir / "cfg.json", R"({
    "method": "shift",
    "window": {"low": 0, "high": 64},
    "bins": 64,
    "seeds": {"mode": "lattice", "spacing": 12},
    "scales": [6, 8],
    "k": 4,
    "dedupe_radius": 6.0
  })");

  const std::string base = "detect --config " + (dir / "cfg.json").string() + " --volume " +
                           (dir / "ball.mhd").string();
  REQUIRE(run(base + " --out " + (dir / "c1.json").string()) == 0);
  REQUIRE(run(base + " --method abmsod --out " + (dir / "c2.json").string()) == 0);

  const auto c1 = json::parse(read_file(dir / "c1.json"));
  const auto c2 = json::parse(read_file(dir / "c2.json"));
  CHECK(c1.at("header").at("config").at("method") == "shift");
  CHECK(c2.at("header").at("config").at("method") == "abmsod");
}

TEST_CASE("unknown config keys are rejected") {
  const auto dir = scratch();
  write_text(dir / "weird.json", R"({"method": "shift", "typo_key": 1})");
  CHECK(run("detect --config " + (dir / "weird.json").string() + " --out " +
            (dir / "z.json").string()) == 1);
}

TEST_CASE("eval detects frame mismatches") {
  const auto dir = scratch();
  write_text(dir / "spec.json", kBallSpec);
  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "ball.mhd").string()) == 0);
  REQUIRE(run("detect --method shift --volume " + (dir / "ball.mhd").string() +
              " --window 0:64 --seeds lattice:12 --scales 6,8 --k 5 --out " +
              (dir / "dets.json").string()) == 0);

  CHECK(run("eval " + (dir / "dets.json").string() + " " + (dir / "ball.gt.json").string() +
            " --out " + (dir / "metrics.json").string()) == 0);
  const auto metrics = json::parse(read_file(dir / "metrics.json"));
  CHECK(metrics.at("recall") == 1.0);
  CHECK(metrics.at("mean_jaccard_matched").get<double>() > 0.0);

  // a ground truth from different dims must be refused
  write_text(dir / "spec2.json", R"({
    "dims": [32, 32, 32],
    "regions": [{"shape": "ball", "center": [16,16,16], "radius": 6,
                 "fill": {"type": "uniform", "levels": 64}}],
    "rng_seed": 1
  })");
  REQUIRE(run("phantom " + (dir / "spec2.json").string() + " " + (dir / "small.mhd").string()) == 0);
  CHECK(run("eval " + (dir / "dets.json").string() + " " + (dir / "small.gt.json").string()) == 1);
}

TEST_CASE("bench reports per-worker medians and stable checksums") {
  const auto dir = scratch();
  write_text(dir / "spec.json", kBallSpec);
  REQUIRE(run("phantom " + (dir / "spec.json").string() + " " + (dir / "ball.mhd").string()) == 0);

  REQUIRE(run("bench --method shift --volume " + (dir / "ball.mhd").string() +
              " --window 0:64 --seeds lattice:16 --scales 6 --k 5 --repeat 1 --out " +
              (dir / "bench.json").string()) == 0);
  const auto bench = json::parse(read_file(dir / "bench.json"));
  CHECK(bench.at("low_confidence") == true);  // single repeat is flagged
  REQUIRE(bench.at("results").size() >= 3);
  std::string checksum;
  for (const auto& row : bench.at("results")) {
    CHECK(row.at("median_ms").get<double>() >= 0.0);
    if (checksum.empty())
      checksum = row.at("detections_checksum").get<std::string>();
    else
      CHECK(row.at("detections_checksum").get<std::string>() == checksum);
  }
}
