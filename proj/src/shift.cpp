#include "salvox/shift.hpp"

namespace salvox {

namespace {

EllipsoidWindow window_at(const Eigen::Vector3d& x, const ShiftParams& params, const Volume& v) {
  Eigen::Vector3d half = params.half_extents;
  if (v.is_2d()) half.z() = 1.0;
  return EllipsoidWindow::from_half_extents(x, half);
}

}  // namespace

std::optional<Eigen::Vector3d> shift_step(const Volume& v, const Eigen::Vector3d& x,
                                          const ShiftParams& params, const IntensityWindow& iw,
                                          EvalCounter* counter) {
  const EllipsoidWindow win = window_at(x, params, v);
  const auto p = try_candidate_histogram(v, win, iw, params.hist_kernel, counter);
  if (!p) return std::nullopt;
  const Histogram q = params.target ? *params.target : Histogram::uniform(iw.bins);

  Eigen::Vector3d num = Eigen::Vector3d::Zero();
  double den = 0.0;
  const uint64_t visited = for_each_support_voxel(v, win, [&](int sx, int sy, int sz, double d) {
    const double w = weight_for_bin(*p, q, iw.bin_of(v.at(sx, sy, sz)));
    const double g = kernel_step_weight(params.step_kernel, d) * w;
    num += g * Eigen::Vector3d(sx, sy, sz);
    den += g;
  });
  if (counter) counter->add(visited);
  if (den <= 0.0) return std::nullopt;
  return Eigen::Vector3d(num / den);
}

ShiftResult saliency_shift(const Volume& v, const Eigen::Vector3d& seed,
                           const ShiftParams& params, const IntensityWindow& iw,
                           EvalCounter* counter) {
  params.validate();
  const Histogram q = params.target ? *params.target : Histogram::uniform(iw.bins);

  ShiftResult r;
  Detection& det = r.det;
  det.center = v.clamp_point(seed);
  det.H = window_at(det.center, params, v).H;

  auto record = [&](const Eigen::Vector3d& x) {
    if (!params.record_trace) return;
    const auto p = try_candidate_histogram(v, window_at(x, params, v), iw, params.hist_kernel);
    r.trace.push_back({x, p ? bhattacharyya(*p, q) : 0.0});
  };

  if (inbounds_support_fraction(v, window_at(det.center, params, v)) <
      params.min_inbounds_fraction) {
    det.flags |= kFlagDegenerate;
    return r;
  }

  record(det.center);
  for (int it = 0; it < params.max_iters; ++it) {
    const auto next = shift_step(v, det.center, params, iw, counter);
    det.iterations = it + 1;
    if (!next) {
      det.flags |= kFlagDegenerate;
      break;
    }
    Eigen::Vector3d moved = *next;
    const Eigen::Vector3d clamped = v.clamp_point(moved);
    if ((clamped - moved).norm() > 0.0) det.flags |= kFlagBoundaryClamped;

    const double step = (clamped - det.center).norm();
    det.center = clamped;
    record(det.center);

    if (inbounds_support_fraction(v, window_at(det.center, params, v)) <
        params.min_inbounds_fraction) {
      det.flags |= kFlagDegenerate;
      break;
    }
    if (step < params.min_step) {
      det.flags |= kFlagConverged;
      break;
    }
  }

  // Final scores. Entropy uses the Epanechnikov profile regardless of the
  // stepping kernel; Bhattacharyya against the target keeps the stepping
  // histogram so it reflects what the iteration ascended.
  const EllipsoidWindow final_win = window_at(det.center, params, v);
  det.H = final_win.H;
  if (!det.has(kFlagDegenerate)) {
    const auto p_score = try_candidate_histogram(v, final_win, iw, Kernel::Epanechnikov, counter);
    const auto p_step = try_candidate_histogram(v, final_win, iw, params.hist_kernel, counter);
    if (p_score && p_step) {
      det.entropy_bits = entropy_bits(*p_score);
      det.bhattacharyya = bhattacharyya(*p_step, q);
    } else {
      det.flags |= kFlagDegenerate;
    }
    try {
      det.pdf_diff = pdf_difference(v, final_win, iw, Kernel::Identity, counter);
    } catch (const std::invalid_argument&) {
      det.pdf_diff = 0.0;
    }
  }
  return r;
}

}  // namespace salvox
