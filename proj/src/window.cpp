#include "salvox/window.hpp"

namespace salvox {

std::optional<Histogram> try_candidate_histogram(const Volume& v, const EllipsoidWindow& win,
                                                 const IntensityWindow& iw, Kernel kernel,
                                                 EvalCounter* counter) {
  Histogram h(iw.bins);
  const double det_fac = 1.0 / std::sqrt(std::max(win.H.determinant(), 1e-300));
  uint64_t support = 0;
  const uint64_t visited = for_each_support_voxel(v, win, [&](int x, int y, int z, double d) {
    ++support;
    h.p[iw.bin_of(v.at(x, y, z))] += det_fac * kernel_value(kernel, d);
  });
  if (counter) counter->add(visited);
  if (support == 0 || h.mass() <= 0.0) return std::nullopt;
  h.normalize();
  return h;
}

Histogram candidate_histogram(const Volume& v, const EllipsoidWindow& win,
                              const IntensityWindow& iw, Kernel kernel, EvalCounter* counter) {
  auto h = try_candidate_histogram(v, win, iw, kernel, counter);
  if (!h)
    throw std::invalid_argument(
        "candidate_histogram: window support holds no usable in-bounds voxel");
  return *h;
}

double pdf_difference(const Volume& v, const EllipsoidWindow& win, const IntensityWindow& iw,
                      Kernel kernel, EvalCounter* counter) {
  const bool two_d = v.is_2d();
  const double s = win.scale(two_d);
  const double ds = 1.0;
  if (s - ds < 1.0)
    throw std::invalid_argument("pdf_difference: degenerate scale (inner flank below 1 voxel)");

  const auto lo = try_candidate_histogram(v, win.scaled_to(s - ds, two_d), iw, kernel, counter);
  const auto hi = try_candidate_histogram(v, win.scaled_to(s + ds, two_d), iw, kernel, counter);
  if (!lo || !hi)
    throw std::invalid_argument("pdf_difference: degenerate flanking support");

  double l1 = 0.0;
  for (int b = 0; b < iw.bins; ++b) l1 += std::abs(hi->p[b] - lo->p[b]);
  return s * s / (2.0 * ds) * l1;
}

double pdf_difference(const Volume& v, const Eigen::Vector3d& center, const IntensityWindow& iw,
                      double scale, Kernel kernel, EvalCounter* counter) {
  return pdf_difference(v, EllipsoidWindow::isotropic(center, scale, v.is_2d()), iw, kernel,
                        counter);
}

double inbounds_support_fraction(const Volume& v, const EllipsoidWindow& win) {
  uint64_t inside = 0;
  for_each_support_voxel(v, win, [&](int, int, int, double) { ++inside; });
  const double expected = win.support_volume(v.is_2d());
  if (expected <= 0.0) return 0.0;
  return std::min(1.0, double(inside) / expected);
}

}  // namespace salvox
