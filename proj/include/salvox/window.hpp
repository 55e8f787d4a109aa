#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>

#include "salvox/histogram.hpp"
#include "salvox/kernel.hpp"
#include "salvox/volume.hpp"

namespace salvox {

/// Counts voxels touched while building window histograms and related
/// per-voxel reductions. Lets callers compare the work done by seek methods
/// against an exhaustive scan.
struct EvalCounter {
  std::atomic<uint64_t> voxel_visits{0};
  void add(uint64_t n) { voxel_visits.fetch_add(n, std::memory_order_relaxed); }
  uint64_t count() const { return voxel_visits.load(std::memory_order_relaxed); }
};

/// Ellipsoidal candidate window: center plus symmetric positive-definite
/// bandwidth matrix H (voxel^2). The support is the Mahalanobis unit ball
/// d(x,s) = (x-s)^T H^-1 (x-s) <= 1. An axis-aligned box window maps onto a
/// diagonal H with the half-extents squared.
struct EllipsoidWindow {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();

  static EllipsoidWindow from_half_extents(const Eigen::Vector3d& center,
                                           const Eigen::Vector3d& half) {
    EllipsoidWindow w;
    w.center = center;
    w.H = half.cwiseProduct(half).asDiagonal();
    return w;
  }

  /// Isotropic window; for single-slice volumes the z axis is pinned to one
  /// voxel so the support stays a disk in the slice plane.
  static EllipsoidWindow isotropic(const Eigen::Vector3d& center, double radius, bool two_d) {
    return from_half_extents(center, {radius, radius, two_d ? 1.0 : radius});
  }

  /// Equivalent isotropic scale: geometric mean of the in-plane/in-volume
  /// semi-axes. Single-slice volumes use the in-plane 2x2 block.
  double scale(bool two_d) const {
    if (two_d) {
      const double det2 = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
      return std::pow(std::max(det2, 0.0), 0.25);
    }
    return std::pow(std::max(H.determinant(), 0.0), 1.0 / 6.0);
  }

  /// Window scaled isotropically so its equivalent scale becomes s_new.
  EllipsoidWindow scaled_to(double s_new, bool two_d) const {
    const double s = scale(two_d);
    EllipsoidWindow w = *this;
    const double f = (s_new / s) * (s_new / s);
    w.H *= f;
    if (two_d) w.H(2, 2) = 1.0;  // keep the slab axis pinned
    return w;
  }

  /// Analytic support volume (voxels); area for single-slice volumes.
  double support_volume(bool two_d) const {
    if (two_d) {
      const double det2 = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
      return std::numbers::pi * std::sqrt(std::max(det2, 0.0));
    }
    return 4.0 / 3.0 * std::numbers::pi * std::sqrt(std::max(H.determinant(), 0.0));
  }
};

/// Visits every in-bounds voxel inside the window's Mahalanobis unit ball.
/// fn(x, y, z, d) receives the squared Mahalanobis distance d <= 1.
/// Returns the number of voxels visited.
template <typename Fn>
uint64_t for_each_support_voxel(const Volume& v, const EllipsoidWindow& win, Fn&& fn) {
  const Eigen::Matrix3d Hinv = win.H.inverse();
  const Eigen::Vector3d ext = win.H.diagonal().cwiseMax(0.0).cwiseSqrt();

  const int x0 = std::max(0, int(std::ceil(win.center.x() - ext.x())));
  const int x1 = std::min(v.nx() - 1, int(std::floor(win.center.x() + ext.x())));
  const int y0 = std::max(0, int(std::ceil(win.center.y() - ext.y())));
  const int y1 = std::min(v.ny() - 1, int(std::floor(win.center.y() + ext.y())));
  const int z0 = std::max(0, int(std::ceil(win.center.z() - ext.z())));
  const int z1 = std::min(v.nz() - 1, int(std::floor(win.center.z() + ext.z())));

  uint64_t visited = 0;
  for (int z = z0; z <= z1; ++z) {
    const double dz = z - win.center.z();
    for (int y = y0; y <= y1; ++y) {
      const double dy = y - win.center.y();
      // Expand d = Hinv(0,0)dx^2 + 2(Hinv(0,1)dy + Hinv(0,2)dz)dx + c(y,z)
      const double c0 = Hinv(1, 1) * dy * dy + 2.0 * Hinv(1, 2) * dy * dz + Hinv(2, 2) * dz * dz;
      const double c1 = 2.0 * (Hinv(0, 1) * dy + Hinv(0, 2) * dz);
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - win.center.x();
        const double d = Hinv(0, 0) * dx * dx + c1 * dx + c0;
        ++visited;
        if (d <= 1.0) fn(x, y, z, d);
      }
    }
  }
  return visited;
}

/// Kernel-weighted candidate histogram over the window support (bin mass
/// |H|^-1/2 K(d) per voxel), normalized over in-bounds voxels. Returns
/// nullopt when the support holds no in-bounds voxel or all kernel mass is
/// zero (degenerate window).
std::optional<Histogram> try_candidate_histogram(const Volume& v, const EllipsoidWindow& win,
                                                 const IntensityWindow& iw, Kernel kernel,
                                                 EvalCounter* counter = nullptr);

/// Throwing variant of try_candidate_histogram.
Histogram candidate_histogram(const Volume& v, const EllipsoidWindow& win,
                              const IntensityWindow& iw, Kernel kernel,
                              EvalCounter* counter = nullptr);

/// Inter-scale pdf change at the window's position: the window is scaled
/// isotropically to s-ds and s+ds (ds = 1 voxel, s the equivalent scale) and
/// the histograms' L1 distance is weighted by s^2/(2 ds). Zero change over a
/// constant region gives zero. Throws when a flanking support is degenerate
/// (< 2 voxels).
double pdf_difference(const Volume& v, const EllipsoidWindow& win, const IntensityWindow& iw,
                      Kernel kernel, EvalCounter* counter = nullptr);

/// Convenience overload for isotropic windows at the given scale.
double pdf_difference(const Volume& v, const Eigen::Vector3d& center, const IntensityWindow& iw,
                      double scale, Kernel kernel, EvalCounter* counter = nullptr);

/// Fraction of the window's analytic support volume that is in-bounds,
/// estimated from the rasterized support. Used for boundary-clipping checks.
double inbounds_support_fraction(const Volume& v, const EllipsoidWindow& win);

}  // namespace salvox
