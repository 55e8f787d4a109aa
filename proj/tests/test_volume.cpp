#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "salvox/histogram.hpp"
#include "salvox/meta_io.hpp"
#include "salvox/phantom.hpp"
#include "salvox/rng.hpp"

using namespace salvox;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  auto p = fs::temp_directory_path() / "salvox_volume_tests";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("volume invariants") {
  CHECK_THROWS(Volume(0, 4, 4));
  CHECK_THROWS(Volume(4, 4, 4, Eigen::Vector3d(1.0, 0.0, 1.0)));
  Volume v(4, 5, 6);
  CHECK(v.size() == 4u * 5u * 6u);
  CHECK(v.is_2d() == false);
  CHECK(Volume(4, 5, 1).is_2d());
}

TEST_CASE("intensity window binning") {
  // window [0,256), M=256: intensity 0 -> bin 0
  IntensityWindow w256(0, 256, 256);
  CHECK(w256.bin_of(0.0) == 0);
  // window [0,100), M=10: intensity 55 -> floor(55/100*10) = 5
  IntensityWindow w10(0, 100, 10);
  CHECK(w10.bin_of(55.0) == 5);
  // clamp rule above the window
  IntensityWindow w(40, 80, 16);
  CHECK(w.bin_of(1000.0) == 15);
  CHECK(w.bin_of(-1000.0) == 0);

  CHECK_THROWS(IntensityWindow(1.0, 1.0, 8));
  CHECK_THROWS(IntensityWindow(0.0, 1.0, 1));
}

TEST_CASE("bin_of is total, monotone, surjective") {
  IntensityWindow w(-3.0, 17.0, 23);
  int prev = 0;
  std::vector<bool> hit(23, false);
  for (int i = 0; i <= 4000; ++i) {
    const double intensity = -10.0 + i * 0.01;
    const int b = w.bin_of(intensity);
    CHECK(b >= 0);
    CHECK(b < 23);
    CHECK(b >= prev);
    prev = b;
    hit[b] = true;
  }
  for (bool h : hit) CHECK(h);
}

TEST_CASE("metaimage round trip") {
  auto dir = scratch_dir();
  Volume v(9, 7, 5, Eigen::Vector3d(0.5, 0.75, 2.0));
  Rng rng(17);
  for (float& f : v.data()) f = float(rng.next_range(-100.0, 100.0));

  const auto path = dir / "roundtrip.mhd";
  save_volume(v, path);
  const Volume r = load_volume(path);

  REQUIRE(r.nx() == v.nx());
  REQUIRE(r.ny() == v.ny());
  REQUIRE(r.nz() == v.nz());
  CHECK(r.spacing() == v.spacing());
  for (size_t i = 0; i < v.size(); ++i) CHECK(r.data()[i] == v.data()[i]);
}

TEST_CASE("single voxel volume round trips") {
  auto dir = scratch_dir();
  Volume v(1, 1, 1);
  v.at(0, 0, 0) = 42.0f;
  save_volume(v, dir / "one.mhd");
  CHECK(fs::file_size(dir / "one.raw") == sizeof(float));
  CHECK(load_volume(dir / "one.mhd").at(0, 0, 0) == 42.0f);
}

TEST_CASE("saved raw payload has exactly nx*ny*nz elements") {
  auto dir = scratch_dir();
  Volume v(128, 128, 34);
  save_volume(v, dir / "large.mhd");
  CHECK(fs::file_size(dir / "large.raw") == 128u * 128u * 34u * sizeof(float));
}

TEST_CASE("uchar payload widens to float") {
  auto dir = scratch_dir();
  {
    std::ofstream raw(dir / "uc.raw", std::ios::binary);
    for (int i = 0; i < 4 * 4 * 2; ++i) raw.put(char(0));
  }
  {
    std::ofstream hdr(dir / "uc.mhd");
    hdr << "NDims = 3\nDimSize = 4 4 2\nElementType = MET_UCHAR\n"
        << "ElementSpacing = 1 1 1\nBinaryDataByteOrderMSB = False\n"
        << "ElementDataFile = uc.raw\n";
  }
  const Volume v = load_volume(dir / "uc.mhd");
  CHECK(v.nx() == 4);
  CHECK(v.nz() == 2);
  for (float f : v.data()) CHECK(f == 0.0f);
}

TEST_CASE("short payload widens with sign") {
  auto dir = scratch_dir();
  {
    std::ofstream raw(dir / "sh.raw", std::ios::binary);
    const int16_t vals[4] = {-5, 0, 7, 3000};
    raw.write(reinterpret_cast<const char*>(vals), sizeof(vals));
  }
  {
    std::ofstream hdr(dir / "sh.mhd");
    hdr << "NDims = 2\nDimSize = 2 2\nElementType = MET_SHORT\n"
        << "ElementDataFile = sh.raw\n";
  }
  const Volume v = load_volume(dir / "sh.mhd");
  CHECK(v.nz() == 1);
  CHECK(v.at(0, 0, 0) == -5.0f);
  CHECK(v.at(1, 1, 0) == 3000.0f);
}

TEST_CASE("size mismatch is an error") {
  auto dir = scratch_dir();
  {
    std::ofstream raw(dir / "bad.raw", std::ios::binary);
    for (int i = 0; i < 999; ++i) raw.put(char(1));
  }
  {
    std::ofstream hdr(dir / "bad.mhd");
    hdr << "NDims = 3\nDimSize = 10 10 10\nElementType = MET_UCHAR\n"
        << "ElementDataFile = bad.raw\n";
  }
  CHECK_THROWS_WITH_AS(load_volume(dir / "bad.mhd"),
                       doctest::Contains("size mismatch"), std::runtime_error);
}

TEST_CASE("missing file and unsupported type errors") {
  auto dir = scratch_dir();
  CHECK_THROWS_AS(load_volume(dir / "nope.mhd"), std::runtime_error);

  {
    std::ofstream raw(dir / "dbl.raw", std::ios::binary);
    for (int i = 0; i < 8; ++i) raw.put(char(0));
  }
  {
    std::ofstream hdr(dir / "dbl.mhd");
    hdr << "NDims = 2\nDimSize = 1 1\nElementType = MET_DOUBLE\nElementDataFile = dbl.raw\n";
  }
  CHECK_THROWS_AS(load_volume(dir / "dbl.mhd"), std::runtime_error);

  {
    std::ofstream hdr(dir / "msb.mhd");
    hdr << "NDims = 2\nDimSize = 1 1\nElementType = MET_UCHAR\n"
        << "BinaryDataByteOrderMSB = True\nElementDataFile = dbl.raw\n";
  }
  CHECK_THROWS_AS(load_volume(dir / "msb.mhd"), std::runtime_error);
}

TEST_CASE("phantom: painted box region reaches its fill entropy") {
  PhantomSpec spec;
  spec.dims = {40, 40, 40};
  spec.background.type = BackgroundSpec::Type::Constant;
  spec.background.value = 0.0;
  RegionSpec r;
  r.shape = RegionSpec::Shape::Box;
  r.center = {20, 20, 20};
  r.half_extents = {10, 10, 10};  // 21^3 voxels, >= 20^3
  r.fill.type = FillSpec::Type::Uniform;
  r.fill.levels = 256;
  spec.regions.push_back(r);
  spec.rng_seed = 7;

  auto [v, gt] = make_phantom(spec);
  REQUIRE(gt.regions.size() == 1);
  CHECK(gt.regions[0].mask.size() == 21u * 21u * 21u);

  // Independent oracle: direct histogram of the painted voxels.
  IntensityWindow iw(0, 256, 256);
  Histogram h(256);
  for (uint64_t idx : gt.regions[0].mask) h.p[iw.bin_of(v.data()[idx])] += 1.0;
  h.normalize();
  CHECK(entropy_bits(h) == doctest::Approx(8.0).epsilon(0.025));  // log2(256) +- 0.2 bits

  // Background voxels all share one bin: entropy exactly zero.
  Histogram hb(256);
  std::vector<uint8_t> in_region(v.size(), 0);
  for (uint64_t idx : gt.regions[0].mask) in_region[idx] = 1;
  for (size_t i = 0; i < v.size(); ++i)
    if (!in_region[i]) hb.p[iw.bin_of(v.data()[i])] += 1.0;
  hb.normalize();
  CHECK(entropy_bits(hb) == 0.0);

  // centroid of a symmetric box is its center
  CHECK(gt.regions[0].center.x() == doctest::Approx(20.0));
}

TEST_CASE("phantom: zero regions gives all-background volume") {
  PhantomSpec spec;
  spec.dims = {8, 8, 8};
  spec.background.value = 3.0;
  auto [v, gt] = make_phantom(spec);
  CHECK(gt.regions.empty());
  for (float f : v.data()) CHECK(f == 3.0f);
}

TEST_CASE("phantom determinism: same spec, same bytes") {
  PhantomSpec spec;
  spec.dims = {24, 24, 24};
  spec.background.type = BackgroundSpec::Type::Gaussian;
  spec.background.mean = 10.0;
  spec.background.sigma = 2.5;
  RegionSpec r;
  r.shape = RegionSpec::Shape::Ball;
  r.center = {12, 12, 12};
  r.radius = 6.0;
  spec.regions.push_back(r);
  spec.rng_seed = 99;

  auto [v1, gt1] = make_phantom(spec);
  auto [v2, gt2] = make_phantom(spec);
  REQUIRE(v1.size() == v2.size());
  for (size_t i = 0; i < v1.size(); ++i) CHECK(v1.data()[i] == v2.data()[i]);
  CHECK(gt1.regions[0].mask == gt2.regions[0].mask);
}

TEST_CASE("phantom rejects out-of-bounds and overlapping regions") {
  PhantomSpec spec;
  spec.dims = {16, 16, 16};
  RegionSpec r;
  r.shape = RegionSpec::Shape::Ball;
  r.center = {2, 8, 8};
  r.radius = 4.0;
  spec.regions.push_back(r);
  CHECK_THROWS_AS(make_phantom(spec), std::runtime_error);

  spec.regions.clear();
  r.center = {7, 7, 7};
  r.radius = 3.0;
  spec.regions.push_back(r);
  r.center = {9, 9, 9};
  spec.regions.push_back(r);
  CHECK_THROWS_WITH_AS(make_phantom(spec), doctest::Contains("overlap"), std::runtime_error);
}

TEST_CASE("phantom spec json round trip") {
  PhantomSpec spec;
  spec.dims = {32, 24, 16};
  spec.background.type = BackgroundSpec::Type::Gaussian;
  spec.background.mean = 5.0;
  spec.background.sigma = 1.5;
  RegionSpec r;
  r.shape = RegionSpec::Shape::Ellipsoid;
  r.center = {16, 12, 8};
  r.axes << 5, 0, 0, 0, 3, 0, 0, 0, 2;
  r.fill.type = FillSpec::Type::Constant;
  r.fill.value = 77.0;
  spec.regions.push_back(r);
  spec.rng_seed = 5;

  const auto round = PhantomSpec::from_json_text(spec.to_json_text());
  CHECK(round.dims == spec.dims);
  CHECK(round.background.mean == spec.background.mean);
  REQUIRE(round.regions.size() == 1);
  CHECK(round.regions[0].axes == r.axes);
  CHECK(round.regions[0].fill.value == 77.0);

  CHECK_THROWS_WITH_AS(PhantomSpec::from_json_text(R"({"dims":[4,4,4],"bogus":1})"),
                       doctest::Contains("unknown key"), std::runtime_error);
}

TEST_CASE("ground truth rle round trip") {
  PhantomSpec spec;
  spec.dims = {20, 20, 20};
  RegionSpec r;
  r.shape = RegionSpec::Shape::Ball;
  r.center = {10, 10, 10};
  r.radius = 5.0;
  spec.regions.push_back(r);
  auto [v, gt] = make_phantom(spec);

  const auto round = GroundTruth::from_json_text(gt.to_json_text());
  REQUIRE(round.regions.size() == 1);
  CHECK(round.dims == gt.dims);
  CHECK(round.regions[0].mask == gt.regions[0].mask);
  CHECK((round.regions[0].H - gt.regions[0].H).norm() < 1e-12);
}
