#include "salvox/hu.hpp"

#include <cmath>
#include <stdexcept>

namespace salvox {

HuVector hu_moments(const Volume& slice) {
  if (!slice.is_2d()) throw std::invalid_argument("hu_moments: expected a 2D slice");
  const int nx = slice.nx(), ny = slice.ny();

  // Raw moments up to order 3 in one pass.
  double m00 = 0, m10 = 0, m01 = 0;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const double f = slice.at(x, y, 0);
      m00 += f;
      m10 += f * x;
      m01 += f * y;
    }
  if (m00 <= 0.0) throw std::invalid_argument("hu_moments: zero total mass");
  const double cx = m10 / m00, cy = m01 / m00;

  double mu20 = 0, mu02 = 0, mu11 = 0, mu30 = 0, mu03 = 0, mu21 = 0, mu12 = 0;
  for (int y = 0; y < ny; ++y) {
    const double dy = y - cy;
    for (int x = 0; x < nx; ++x) {
      const double f = slice.at(x, y, 0);
      const double dx = x - cx;
      mu20 += f * dx * dx;
      mu02 += f * dy * dy;
      mu11 += f * dx * dy;
      mu30 += f * dx * dx * dx;
      mu03 += f * dy * dy * dy;
      mu21 += f * dx * dx * dy;
      mu12 += f * dx * dy * dy;
    }
  }

  const double s2 = std::pow(m00, 2.0);  // (p+q)/2 + 1 = 2 for order 2
  const double s3 = std::pow(m00, 2.5);  // 2.5 for order 3
  const double n20 = mu20 / s2, n02 = mu02 / s2, n11 = mu11 / s2;
  const double n30 = mu30 / s3, n03 = mu03 / s3, n21 = mu21 / s3, n12 = mu12 / s3;

  HuVector h;
  h[0] = n20 + n02;
  h[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
  h[2] = (n30 - 3 * n12) * (n30 - 3 * n12) + (3 * n21 - n03) * (3 * n21 - n03);
  h[3] = (n30 + n12) * (n30 + n12) + (n21 + n03) * (n21 + n03);
  h[4] = (n30 - 3 * n12) * (n30 + n12) *
             ((n30 + n12) * (n30 + n12) - 3 * (n21 + n03) * (n21 + n03)) +
         (3 * n21 - n03) * (n21 + n03) *
             (3 * (n30 + n12) * (n30 + n12) - (n21 + n03) * (n21 + n03));
  h[5] = (n20 - n02) * ((n30 + n12) * (n30 + n12) - (n21 + n03) * (n21 + n03)) +
         4.0 * n11 * (n30 + n12) * (n21 + n03);
  h[6] = (3 * n21 - n03) * (n30 + n12) *
             ((n30 + n12) * (n30 + n12) - 3 * (n21 + n03) * (n21 + n03)) -
         (n30 - 3 * n12) * (n21 + n03) *
             (3 * (n30 + n12) * (n30 + n12) - (n21 + n03) * (n21 + n03));
  return h;
}

double hu_distance(const HuVector& a, const HuVector& b) {
  double d2 = 0.0;
  for (int i = 0; i < 7; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d2);
}

}  // namespace salvox
