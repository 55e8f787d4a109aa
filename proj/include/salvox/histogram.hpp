#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace salvox {

/// Probability mass function over a fixed number of bins.
struct Histogram {
  std::vector<double> p;
  bool normalized = false;

  Histogram() = default;
  explicit Histogram(int bins) : p(bins, 0.0) {}

  int bins() const { return static_cast<int>(p.size()); }

  double mass() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  /// Scales bin masses to sum to one. Throws when total mass is zero.
  void normalize() {
    const double s = mass();
    if (s <= 0.0) throw std::invalid_argument("Histogram::normalize: zero total mass");
    for (double& v : p) v /= s;
    normalized = true;
  }

  void check_normalized() const {
    if (!normalized || std::abs(mass() - 1.0) > 1e-9)
      throw std::invalid_argument("histogram is not normalized");
  }

  static Histogram uniform(int bins) {
    Histogram h(bins);
    for (double& v : h.p) v = 1.0 / bins;
    h.normalized = true;
    return h;
  }

  static Histogram delta(int bins, int hot) {
    Histogram h(bins);
    h.p.at(hot) = 1.0;
    h.normalized = true;
    return h;
  }
};

/// Shannon entropy in nats; empty bins contribute zero by continuity.
inline double entropy_nats(const Histogram& h) {
  h.check_normalized();
  double e = 0.0;
  for (double v : h.p)
    if (v > 0.0) e -= v * std::log(v);
  return std::max(e, 0.0);
}

/// Shannon entropy in bits; bounded by log2(bins).
inline double entropy_bits(const Histogram& h) {
  return entropy_nats(h) / std::numbers::ln2;
}

/// Closed-form entropy (nats) of the two-part mixture: a uniform source over
/// M bins blended with fraction alpha into a single-bin background.
///   H(a) = -(a/M + 1-a) ln(a/M + 1-a) - a (M-1)/M ln(a/M)
/// H(0) = 0 and H(1) = ln M.
inline double mixture_entropy(double alpha, int bins) {
  if (bins < 2) throw std::invalid_argument("mixture_entropy: bins must be >= 2");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::domain_error("mixture_entropy: alpha outside [0,1]");
  if (alpha == 0.0) return 0.0;
  const double m = bins;
  const double shared = alpha / m + (1.0 - alpha);
  return -shared * std::log(shared) - alpha * (m - 1.0) / m * std::log(alpha / m);
}

/// d/da of mixture_entropy:  (M-1)/M * ln((a + M(1-a)) / a).
/// Strictly positive for a in (0,1), zero at a = 1; diverges at a = 0.
inline double mixture_entropy_derivative(double alpha, int bins) {
  if (bins < 2) throw std::invalid_argument("mixture_entropy_derivative: bins must be >= 2");
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::domain_error("mixture_entropy_derivative: alpha outside (0,1]");
  const double m = bins;
  return (m - 1.0) / m * std::log((alpha + m * (1.0 - alpha)) / alpha);
}

/// Bhattacharyya coefficient rho = sum_b sqrt(p_b q_b), in [0,1];
/// 1 iff the distributions coincide.
inline double bhattacharyya(const Histogram& p, const Histogram& q) {
  p.check_normalized();
  q.check_normalized();
  if (p.bins() != q.bins())
    throw std::invalid_argument("bhattacharyya: bin-count mismatch");
  double rho = 0.0;
  for (int b = 0; b < p.bins(); ++b) rho += std::sqrt(p.p[b] * q.p[b]);
  return std::min(rho, 1.0);
}

/// Floor applied to candidate bins before dividing in the weight map; keeps
/// weights finite when a bin is empty.
inline constexpr double kEmptyBinFloor = 1e-6;

/// Mean-shift importance weight sqrt(q_b / p_b) for the bin that intensity
/// falls in, with the empty-bin floor on p.
inline double weight_for_bin(const Histogram& p, const Histogram& q, int bin) {
  return std::sqrt(q.p[bin] / std::max(p.p[bin], kEmptyBinFloor));
}

}  // namespace salvox
