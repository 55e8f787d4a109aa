#include "salvox/quadrant.hpp"

#include <cmath>

#include "salvox/histogram.hpp"
#include "salvox/parallel.hpp"

namespace salvox {

namespace {

// Quadrant diagonal directions in NE, NW, SW, SE order. Image coordinates:
// +x right, +y up-in-index-space (N = +y).
constexpr std::array<std::array<int, 2>, 4> kQuadrantDirs = {{{+1, +1}, {-1, +1}, {-1, -1}, {+1, -1}}};

}  // namespace

double box_entropy_bits(const Volume& v, double x0, double x1, double y0, double y1,
                        const IntensityWindow& iw, int min_pixels, EvalCounter* counter) {
  const int ix0 = std::max(0, int(std::ceil(std::min(x0, x1))));
  const int ix1 = std::min(v.nx() - 1, int(std::floor(std::max(x0, x1))));
  const int iy0 = std::max(0, int(std::ceil(std::min(y0, y1))));
  const int iy1 = std::min(v.ny() - 1, int(std::floor(std::max(y0, y1))));
  if (ix0 > ix1 || iy0 > iy1) return 0.0;

  const int count = (ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  if (count < min_pixels) return 0.0;

  Histogram h(iw.bins);
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) h.p[iw.bin_of(v.at(x, y, 0))] += 1.0;
  if (counter) counter->add(uint64_t(count));
  h.normalize();
  return entropy_bits(h);
}

std::pair<Eigen::Vector2d, QuadrantState> quadrant_step(const Volume& v,
                                                        const Eigen::Vector2d& p,
                                                        const QuadrantParams& params,
                                                        const IntensityWindow& iw,
                                                        EvalCounter* counter) {
  if (!v.is_2d()) throw std::invalid_argument("quadrant_step: volume must be 2D (nz == 1)");

  QuadrantState st;
  for (int q = 0; q < 4; ++q) {
    double best_e = 0.0;
    int best_k = params.scale_range.front();
    for (int k : params.scale_range) {
      const double dx = kQuadrantDirs[q][0] * double(k);
      const double dy = kQuadrantDirs[q][1] * double(k);
      const double e = box_entropy_bits(v, p.x(), p.x() + dx, p.y(), p.y() + dy, iw, 4, counter);
      if (e > best_e) {  // strict: smallest scale wins ties
        best_e = e;
        best_k = k;
      }
    }
    st.entropy[q] = best_e;
    st.best_scale[q] = best_k;
  }

  double total = 0.0;
  for (double e : st.entropy) total += e;
  if (total <= 0.0) {
    st.degenerate = true;
    return {p, st};
  }

  Eigen::Vector2d ed = Eigen::Vector2d::Zero();
  for (int q = 0; q < 4; ++q) {
    st.norm_entropy[q] = st.entropy[q] / total;
    // Displacement of magnitude sqrt(2)*k_opt along the quadrant diagonal.
    ed.x() += st.norm_entropy[q] * kQuadrantDirs[q][0] * st.best_scale[q];
    ed.y() += st.norm_entropy[q] * kQuadrantDirs[q][1] * st.best_scale[q];
  }
  st.displacement = ed;

  Eigen::Vector2d moved = p + ed;
  moved.x() = std::clamp(moved.x(), 0.0, double(v.nx() - 1));
  moved.y() = std::clamp(moved.y(), 0.0, double(v.ny() - 1));
  return {moved, st};
}

QuadrantResult quadrant_seek_one(const Volume& v, const Eigen::Vector2d& seed,
                                 const QuadrantParams& params, const IntensityWindow& iw,
                                 EvalCounter* counter) {
  params.validate();

  QuadrantResult r;
  r.position = seed;
  QuadrantState last;
  for (int it = 0; it < params.max_iters; ++it) {
    auto [moved, st] = quadrant_step(v, r.position, params, iw, counter);
    r.iterations = it + 1;
    last = st;
    if (st.degenerate) {
      r.degenerate = true;
      break;
    }
    r.position = moved;
    if (st.displacement.norm() < params.eta) {
      r.converged = true;
      break;
    }
  }

  if (!r.degenerate) {
    int best_q = 0;
    for (int q = 1; q < 4; ++q)
      if (last.entropy[q] > last.entropy[best_q]) best_q = q;
    r.best_scale = last.best_scale[best_q];
    r.entropy_bits = last.entropy[best_q];
  }
  return r;
}

std::vector<QuadrantResult> quadrant_seek(const Volume& v,
                                          const std::vector<Eigen::Vector2d>& seeds,
                                          const QuadrantParams& params, const IntensityWindow& iw,
                                          unsigned workers, EvalCounter* counter) {
  if (seeds.empty()) throw std::invalid_argument("quadrant_seek: no seeds");
  std::vector<QuadrantResult> out(seeds.size());
  parallel_for(seeds.size(), workers,
               [&](size_t i) { out[i] = quadrant_seek_one(v, seeds[i], params, iw, counter); });
  return out;
}

}  // namespace salvox
