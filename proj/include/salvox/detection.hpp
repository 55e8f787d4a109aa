#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace salvox {

enum DetectionFlags : uint32_t {
  kFlagConverged = 1u << 0,
  kFlagDegenerate = 1u << 1,
  kFlagBoundaryClamped = 1u << 2,
};

/// A converged candidate window plus its scores.
struct Detection {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
  double entropy_bits = 0.0;
  double pdf_diff = 0.0;
  double bhattacharyya = 0.0;
  int iterations = 0;
  uint32_t flags = 0;
  int seed_index = -1;

  bool has(DetectionFlags f) const { return (flags & f) != 0; }

  std::vector<std::string> flag_names() const {
    std::vector<std::string> out;
    if (has(kFlagConverged)) out.push_back("converged");
    if (has(kFlagDegenerate)) out.push_back("degenerate");
    if (has(kFlagBoundaryClamped)) out.push_back("boundary-clamped");
    return out;
  }
};

}  // namespace salvox
