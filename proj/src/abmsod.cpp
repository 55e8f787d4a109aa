#include "salvox/abmsod.hpp"

#include <Eigen/Dense>

namespace salvox {

namespace {

struct EigenPair {
  Eigen::Vector3d values;
  Eigen::Matrix3d vectors;
};

EigenPair symmetric_eigen(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("abmsod: eigen decomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

Eigen::Matrix3d bandwidth_from_moment(const Eigen::Matrix3d& weighted_outer_sum,
                                      double weight_sum, int dim, double lambda_min,
                                      double lambda_max) {
  if (weight_sum <= 0.0) throw std::invalid_argument("bandwidth update: zero weight mass");
  if (!weighted_outer_sum.allFinite())
    throw std::invalid_argument("bandwidth update: non-finite moment");

  Eigen::Matrix3d moment = weighted_outer_sum / weight_sum;
  moment = 0.5 * (moment + moment.transpose().eval());

  // The second moment of a uniformly weighted Mahalanobis unit ball is
  // H / (dim + 2); rescale so a converged window reproduces its own support.
  moment *= double(dim + 2);

  auto [values, vectors] = symmetric_eigen(moment);
  for (int i = 0; i < 3; ++i) values[i] = std::clamp(values[i], lambda_min, lambda_max);
  return vectors * values.asDiagonal() * vectors.transpose();
}

Eigen::Matrix3d bandwidth_update(const Volume& v, const Eigen::Vector3d& x_new,
                                 const EllipsoidWindow& win, const Histogram& candidate,
                                 const Histogram& target, const IntensityWindow& iw,
                                 const AbmsodParams& params, EvalCounter* counter) {
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  double wsum = 0.0;
  const uint64_t visited = for_each_support_voxel(v, win, [&](int sx, int sy, int sz, double) {
    const double w = weight_for_bin(candidate, target, iw.bin_of(v.at(sx, sy, sz)));
    const Eigen::Vector3d d = x_new - Eigen::Vector3d(sx, sy, sz);
    outer += w * d * d.transpose();
    wsum += w;
  });
  if (counter) counter->add(visited);
  const int dim = v.is_2d() ? 2 : 3;
  return bandwidth_from_moment(outer, wsum, dim, params.lambda_min, params.lambda_max_for(v));
}

AbmsodResult abmsod_run(const Volume& v, const EllipsoidWindow& seed, const AbmsodParams& params,
                        const IntensityWindow& iw, EvalCounter* counter) {
  params.validate();
  const Histogram target = params.target ? *params.target : Histogram::uniform(iw.bins);

  AbmsodResult r;
  Detection& det = r.det;
  det.center = v.clamp_point(seed.center);
  det.H = seed.H;

  Eigen::Vector3d x = det.center;
  Eigen::Matrix3d H = seed.H;
  double max_bhatcf = 0.0;
  Eigen::Vector3d x_opt = x;
  Eigen::Matrix3d H_opt = H;
  int stalled = 0;
  bool any_iteration = false;

  for (int it = 0; it < params.max_iterations; ++it) {
    EllipsoidWindow win{x, H};
    if (inbounds_support_fraction(v, win) < params.min_inbounds_fraction) {
      det.flags |= kFlagDegenerate;
      break;
    }
    const auto hp = try_candidate_histogram(v, win, iw, params.kernel, counter);
    if (!hp) {
      det.flags |= kFlagDegenerate;
      break;
    }

    // Position update: -K'-weighted importance centroid.
    Eigen::Vector3d num = Eigen::Vector3d::Zero();
    double den = 0.0;
    uint64_t visited = for_each_support_voxel(v, win, [&](int sx, int sy, int sz, double d) {
      const double w = weight_for_bin(*hp, target, iw.bin_of(v.at(sx, sy, sz)));
      const double g = kernel_step_weight(params.kernel, d) * w;
      num += g * Eigen::Vector3d(sx, sy, sz);
      den += g;
    });
    if (counter) counter->add(visited);
    if (den <= 0.0) {
      det.flags |= kFlagDegenerate;
      break;
    }
    Eigen::Vector3d x_new = num / den;
    const Eigen::Vector3d clamped = v.clamp_point(x_new);
    if ((clamped - x_new).norm() > 0.0) det.flags |= kFlagBoundaryClamped;
    x_new = clamped;

    // Rebuild histogram and weights at the new position with the old H, then
    // estimate the bandwidth there.
    EllipsoidWindow moved{x_new, H};
    const auto hp_new = try_candidate_histogram(v, moved, iw, params.kernel, counter);
    if (!hp_new) {
      det.flags |= kFlagDegenerate;
      break;
    }
    Eigen::Matrix3d H_new;
    try {
      H_new = bandwidth_update(v, x_new, moved, *hp_new, target, iw, params, counter);
    } catch (const std::invalid_argument&) {
      det.flags |= kFlagDegenerate;
      break;
    }

    const double bhatcf = bhattacharyya(*hp_new, target);
    any_iteration = true;
    det.iterations = it + 1;

    const bool improved = bhatcf > max_bhatcf + params.threshold;
    if (bhatcf > max_bhatcf) {
      max_bhatcf = bhatcf;
      x_opt = x_new;
      H_opt = H_new;
    }

    if (params.record_trace) {
      auto [values, vectors] = symmetric_eigen(H_new);
      (void)vectors;
      r.trace.push_back({x_new, H_new, bhatcf, max_bhatcf, values.minCoeff(), values.maxCoeff()});
    }

    x = x_new;
    H = H_new;

    // Stall rule: stop after two consecutive iterations that fail to improve
    // the best coefficient by at least the threshold.
    stalled = improved ? 0 : stalled + 1;
    if (stalled >= 2) {
      det.flags |= kFlagConverged;
      break;
    }
  }

  if (any_iteration) {
    det.center = x_opt;
    det.H = H_opt;
    det.bhattacharyya = max_bhatcf;
    const EllipsoidWindow opt_win{x_opt, H_opt};
    const auto p_score = try_candidate_histogram(v, opt_win, iw, Kernel::Epanechnikov, counter);
    if (p_score) det.entropy_bits = entropy_bits(*p_score);
    try {
      det.pdf_diff = pdf_difference(v, opt_win, iw, Kernel::Identity, counter);
    } catch (const std::invalid_argument&) {
      det.pdf_diff = 0.0;
    }
  } else {
    det.flags |= kFlagDegenerate;
  }
  return r;
}

}  // namespace salvox
