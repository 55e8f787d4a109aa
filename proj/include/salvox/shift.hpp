#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "salvox/detection.hpp"
#include "salvox/histogram.hpp"
#include "salvox/kernel.hpp"
#include "salvox/volume.hpp"
#include "salvox/window.hpp"

namespace salvox {

/// Fixed-bandwidth mean shift toward a target histogram (uniform by default,
/// which turns Bhattacharyya ascent into entropy ascent).
struct ShiftParams {
  Eigen::Vector3d half_extents = {8.0, 8.0, 8.0};  // diagonal bandwidth, per-axis half sizes
  Kernel step_kernel = Kernel::Identity;           // -K' weighting of the position update
  Kernel hist_kernel = Kernel::Identity;           // K weighting of the candidate histogram
  int max_iters = 50;
  double min_step = 0.1;                  // convergence threshold on |x_{t+1} - x_t| (voxels)
  std::optional<Histogram> target;        // uniform over iw.bins when unset
  double min_inbounds_fraction = 0.1;     // more clipping than this flags the run degenerate
  bool record_trace = false;

  void validate() const {
    if (half_extents.minCoeff() <= 0.0)
      throw std::invalid_argument("shift: half extents must be > 0");
    if (min_step <= 0.0) throw std::invalid_argument("shift: min_step must be > 0");
    if (max_iters < 1) throw std::invalid_argument("shift: max_iters must be >= 1");
  }
};

struct ShiftIterRecord {
  Eigen::Vector3d position;
  double bhattacharyya;
};

struct ShiftResult {
  Detection det;
  std::vector<ShiftIterRecord> trace;  // filled when params.record_trace
};

/// One mean-shift step: candidate histogram at x, per-voxel importance
/// weights sqrt(q_b/p_b), then the -K'-weighted centroid. Returns nullopt on
/// zero total weight (degenerate window).
std::optional<Eigen::Vector3d> shift_step(const Volume& v, const Eigen::Vector3d& x,
                                          const ShiftParams& params, const IntensityWindow& iw,
                                          EvalCounter* counter = nullptr);

/// Iterates shift_step from a seed until the displacement drops below
/// min_step or max_iters is hit. The bandwidth matrix never changes. The
/// detection's entropy is recomputed with the Epanechnikov profile; its
/// Bhattacharyya value is taken against the target.
ShiftResult saliency_shift(const Volume& v, const Eigen::Vector3d& seed,
                           const ShiftParams& params, const IntensityWindow& iw,
                           EvalCounter* counter = nullptr);

}  // namespace salvox
