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

/// Adaptive-bandwidth mean shift: alternates position updates with
/// bandwidth-matrix (scale + orientation) updates, tracking the best
/// Bhattacharyya iterate.
struct AbmsodParams {
  std::optional<Histogram> target;   // uniform over iw.bins when unset
  double threshold = 1e-4;           // Bhattacharyya stall tolerance
  int max_iterations = 15;
  Kernel kernel = Kernel::Gaussian;  // exp(-d/2) histogram weighting and stepping profile
  double lambda_min = 4.0;           // eigenvalue clamp bounds on H (voxel^2)
  double lambda_max = 0.0;           // 0 -> (max volume dim / 2)^2
  double min_inbounds_fraction = 0.1;
  bool record_trace = false;

  void validate() const {
    if (threshold <= 0.0) throw std::invalid_argument("abmsod: threshold must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("abmsod: max_iterations must be >= 1");
    if (lambda_min <= 0.0) throw std::invalid_argument("abmsod: lambda_min must be > 0");
  }

  double lambda_max_for(const Volume& v) const {
    if (lambda_max > 0.0) return lambda_max;
    const double half = std::max({v.nx(), v.ny(), v.nz()}) / 2.0;
    return half * half;
  }
};

struct AbmsodIterRecord {
  Eigen::Vector3d position;
  Eigen::Matrix3d H;
  double bhattacharyya = 0.0;
  double max_bhattacharyya = 0.0;
  double eig_min = 0.0, eig_max = 0.0;
};

struct AbmsodResult {
  Detection det;  // carries x_opt, H_opt, max_bhatcf of the best iterate
  std::vector<AbmsodIterRecord> trace;
};

/// Importance-weighted second-moment bandwidth estimate: the raw moment
/// sum w (x-s)(x-s)^T / sum w is symmetrized, scaled so a uniformly weighted
/// unit ball reproduces its own support (factor dim+2), and eigenvalue
/// clamped into [lambda_min, lambda_max]. `dim` is 2 for single-slice
/// volumes, else 3. Throws on zero weight mass or non-finite entries.
Eigen::Matrix3d bandwidth_from_moment(const Eigen::Matrix3d& weighted_outer_sum,
                                      double weight_sum, int dim, double lambda_min,
                                      double lambda_max);

/// Accumulates the Eq.-style weighted moment of the window support around
/// x_new and maps it through bandwidth_from_moment.
Eigen::Matrix3d bandwidth_update(const Volume& v, const Eigen::Vector3d& x_new,
                                 const EllipsoidWindow& win, const Histogram& candidate,
                                 const Histogram& target, const IntensityWindow& iw,
                                 const AbmsodParams& params, EvalCounter* counter = nullptr);

/// Full iterative search from one seed window.
AbmsodResult abmsod_run(const Volume& v, const EllipsoidWindow& seed, const AbmsodParams& params,
                        const IntensityWindow& iw, EvalCounter* counter = nullptr);

}  // namespace salvox
