#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "salvox/volume.hpp"

namespace salvox {

/// Background model: a constant intensity (delta distribution) or Gaussian
/// noise.
struct BackgroundSpec {
  enum class Type { Constant, Gaussian } type = Type::Constant;
  double value = 0.0;  // constant intensity
  double mean = 0.0, sigma = 1.0;
};

/// How region voxels are filled: independent uniform draws over the integer
/// levels {0..levels-1}, or a constant contrast value.
struct FillSpec {
  enum class Type { Uniform, Constant } type = Type::Uniform;
  int levels = 64;
  double value = 0.0;
};

/// A salient region to paint: axis-aligned box, ball, or oriented ellipsoid.
/// For ellipsoids the 3x3 `axes` matrix holds the semi-axis vectors as
/// columns (orthogonal, lengths = semi-axis lengths in voxels).
struct RegionSpec {
  enum class Shape { Box, Ball, Ellipsoid } shape = Shape::Box;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();  // box
  double radius = 0.0;                                     // ball
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();      // ellipsoid
  FillSpec fill;
};

struct PhantomSpec {
  Eigen::Vector3i dims = {64, 64, 64};
  Eigen::Vector3d spacing = {1.0, 1.0, 1.0};
  BackgroundSpec background;
  std::vector<RegionSpec> regions;
  uint64_t rng_seed = 0;

  static PhantomSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Per-region ground truth: rasterized mask (sorted linear voxel indices),
/// its centroid, and the ideal bandwidth matrix (Mahalanobis form whose unit
/// ball reproduces the region support; boxes use the inscribed ellipsoid).
struct GroundTruthRegion {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
  std::vector<uint64_t> mask;  // sorted linear indices
};

struct GroundTruth {
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<GroundTruthRegion> regions;

  /// Serialized with masks run-length encoded as [start, len, start, len, ...].
  std::string to_json_text() const;
  static GroundTruth from_json_text(const std::string& text);
};

/// Paints the background then each region, deterministically for a fixed
/// rng_seed. Throws when a region leaves the volume or overlaps another.
std::pair<Volume, GroundTruth> make_phantom(const PhantomSpec& spec);

}  // namespace salvox
