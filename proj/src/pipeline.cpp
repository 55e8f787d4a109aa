#include "salvox/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "salvox/hu.hpp"
#include "salvox/parallel.hpp"

namespace salvox {

Method method_from_name(const std::string& name) {
  if (name == "quadrant") return Method::Quadrant;
  if (name == "shift") return Method::Shift;
  if (name == "abmsod") return Method::Abmsod;
  throw std::invalid_argument("unknown method '" + name + "'");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::Quadrant: return "quadrant";
    case Method::Shift: return "shift";
    case Method::Abmsod: return "abmsod";
  }
  return "?";
}

namespace {

/// Sphere support offsets at a fixed radius, cached for the dense scan.
struct SphereOffsets {
  std::vector<std::array<int, 3>> at;
  std::vector<double> d;  // squared Mahalanobis distance per offset
};

SphereOffsets make_sphere_offsets(double radius, bool two_d) {
  SphereOffsets out;
  const int r = int(std::floor(radius));
  const double r2 = radius * radius;
  const int zr = two_d ? 0 : r;
  for (int z = -zr; z <= zr; ++z)
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x) {
        const double d = (double(x) * x + double(y) * y + double(z) * z) / r2;
        if (d <= 1.0) {
          out.at.push_back({x, y, z});
          out.d.push_back(d);
        }
      }
  return out;
}

double quantile_threshold(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double idx = q * double(values.size() - 1);
  return values[size_t(std::floor(idx))];
}

}  // namespace

ExhaustiveResult kadir_brady_exhaustive(const Volume& v, const IntensityWindow& iw,
                                        const std::vector<double>& scales, Kernel kernel,
                                        EvalCounter* counter, uint64_t budget) {
  if (scales.empty()) throw std::invalid_argument("exhaustive scan: no scales");
  for (double s : scales)
    if (s < 2.0) throw std::invalid_argument("exhaustive scan: scales must be >= 2 voxels");
  const uint64_t evals = v.size() * scales.size();
  if (evals > budget)
    throw std::invalid_argument("exhaustive scan: budget exceeded (" + std::to_string(evals) +
                                " voxel-scale evaluations)");

  const bool two_d = v.is_2d();

  // Distinct radii needed: every scale plus its +-1 voxel flanks.
  std::vector<double> radii;
  for (double s : scales) {
    radii.push_back(s - 1.0);
    radii.push_back(s);
    radii.push_back(s + 1.0);
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  std::vector<SphereOffsets> offsets;
  offsets.reserve(radii.size());
  for (double r : radii) offsets.push_back(make_sphere_offsets(r, two_d));
  auto radius_index = [&](double r) {
    return size_t(std::lower_bound(radii.begin(), radii.end(), r) - radii.begin());
  };

  ExhaustiveResult res;
  res.map.dims = {v.nx(), v.ny(), v.nz()};
  res.map.score.assign(v.size(), 0.0f);
  res.map.best_scale.assign(v.size(), 0.0f);

  std::vector<Histogram> hists(radii.size(), Histogram(iw.bins));
  uint64_t visits = 0;

  for (int z = 0; z < v.nz(); ++z)
    for (int y = 0; y < v.ny(); ++y)
      for (int x = 0; x < v.nx(); ++x) {
        // Histograms at every needed radius around this center.
        for (size_t ri = 0; ri < radii.size(); ++ri) {
          Histogram& h = hists[ri];
          std::fill(h.p.begin(), h.p.end(), 0.0);
          h.normalized = false;
          const auto& off = offsets[ri];
          for (size_t i = 0; i < off.at.size(); ++i) {
            const int sx = x + off.at[i][0];
            const int sy = y + off.at[i][1];
            const int sz = z + off.at[i][2];
            if (sx < 0 || sx >= v.nx() || sy < 0 || sy >= v.ny() || sz < 0 || sz >= v.nz())
              continue;
            h.p[iw.bin_of(v.at(sx, sy, sz))] += kernel_value(kernel, off.d[i]);
          }
          visits += off.at.size();
          if (h.mass() > 0.0) h.normalize();
        }

        double best = 0.0, best_scale = 0.0;
        for (double s : scales) {
          const Histogram& hc = hists[radius_index(s)];
          const Histogram& hlo = hists[radius_index(s - 1.0)];
          const Histogram& hhi = hists[radius_index(s + 1.0)];
          if (!hc.normalized || !hlo.normalized || !hhi.normalized) continue;
          const double e = entropy_bits(hc);
          double l1 = 0.0;
          for (int b = 0; b < iw.bins; ++b) l1 += std::abs(hhi.p[b] - hlo.p[b]);
          const double score = e * (s * s / 2.0) * l1;
          if (score > best) {
            best = score;
            best_scale = s;
          }
        }
        const size_t idx = v.index(x, y, z);
        res.map.score[idx] = float(best);
        res.map.best_scale[idx] = float(best_scale);
      }
  if (counter) counter->add(visits);

  // Strict local maxima over the full neighborhood (8 in 2D, 26 in 3D).
  for (int z = 0; z < v.nz(); ++z)
    for (int y = 0; y < v.ny(); ++y)
      for (int x = 0; x < v.nx(); ++x) {
        const float s0 = res.map.score[v.index(x, y, z)];
        if (s0 <= 0.0f) continue;
        bool is_max = true;
        for (int dz = -1; dz <= 1 && is_max; ++dz)
          for (int dy = -1; dy <= 1 && is_max; ++dy)
            for (int dx = -1; dx <= 1 && is_max; ++dx) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              const int sx = x + dx, sy = y + dy, sz = z + dz;
              if (!v.contains(sx, sy, sz)) continue;
              if (res.map.score[v.index(sx, sy, sz)] >= s0) is_max = false;
            }
        if (is_max)
          res.maxima.push_back({Eigen::Vector3d(x, y, z), double(s0),
                                double(res.map.best_scale[v.index(x, y, z)])});
      }

  std::stable_sort(res.maxima.begin(), res.maxima.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  return res;
}

std::vector<Detection> dedupe_top_k(std::vector<Detection> dets, int k, double radius) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.pdf_diff > b.pdf_diff; });
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    if (int(kept.size()) >= k) break;
    bool clear = true;
    for (const auto& acc : kept)
      if ((acc.center - d.center).norm() <= radius) {
        clear = false;
        break;
      }
    if (clear) kept.push_back(d);
  }
  return kept;
}

std::vector<uint64_t> rasterize_window(const Volume& frame, const EllipsoidWindow& win) {
  std::vector<uint64_t> out;
  for_each_support_voxel(frame, win, [&](int x, int y, int z, double) {
    out.push_back(frame.index(x, y, z));
  });
  std::sort(out.begin(), out.end());
  return out;
}

double jaccard(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  if (a.empty() && b.empty())
    throw std::invalid_argument("jaccard: both sets are empty");
  size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const size_t uni = a.size() + b.size() - inter;
  return double(inter) / double(uni);
}

double jaccard(const Volume& frame, const EllipsoidWindow& win,
               const std::vector<uint64_t>& mask) {
  return jaccard(rasterize_window(frame, win), mask);
}

namespace {

/// Axial crop of the window's in-plane bounding box at slice z.
Volume crop_slice(const Volume& v, const Detection& det, int z) {
  const double ex = std::sqrt(std::max(det.H(0, 0), 1.0));
  const double ey = std::sqrt(std::max(det.H(1, 1), 1.0));
  const int x0 = std::max(0, int(std::floor(det.center.x() - ex)));
  const int x1 = std::min(v.nx() - 1, int(std::ceil(det.center.x() + ex)));
  const int y0 = std::max(0, int(std::floor(det.center.y() - ey)));
  const int y1 = std::min(v.ny() - 1, int(std::ceil(det.center.y() + ey)));
  Volume crop(x1 - x0 + 1, y1 - y0 + 1, 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) crop.at(x - x0, y - y0, 0) = v.at(x, y, z);
  return crop;
}

}  // namespace

double hu_template_distance(const Detection& det, const Volume& v, const Volume& template_2d,
                            int slices) {
  const HuVector target = hu_moments(template_2d);
  const int zc = int(std::lround(det.center.z()));
  const int half = slices / 2;
  double sum = 0.0;
  int used = 0;
  for (int dz = -half; dz <= half; ++dz) {
    const int z = zc + dz;
    if (z < 0 || z >= v.nz()) continue;  // thinner than requested: use what exists
    try {
      sum += hu_distance(hu_moments(crop_slice(v, det, z)), target);
      ++used;
    } catch (const std::invalid_argument&) {
      // zero-mass crop contributes nothing
    }
  }
  if (used == 0) return std::numeric_limits<double>::infinity();
  return sum / used;
}

size_t hu_filter(const std::vector<Detection>& dets, const Volume& v, const Volume& template_2d,
                 int slices) {
  if (dets.empty()) throw std::invalid_argument("hu_filter: no detections");
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < dets.size(); ++i) {
    const double d = hu_template_distance(dets[i], v, template_2d, slices);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<ThresholdComponent> threshold_baseline(const Volume& v, double threshold) {
  std::vector<uint8_t> seen(v.size(), 0);
  std::vector<ThresholdComponent> comps;
  std::deque<std::array<int, 3>> queue;

  for (int z = 0; z < v.nz(); ++z)
    for (int y = 0; y < v.ny(); ++y)
      for (int x = 0; x < v.nx(); ++x) {
        const size_t idx = v.index(x, y, z);
        if (seen[idx] || v.at(x, y, z) < threshold) continue;
        ThresholdComponent comp;
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        seen[idx] = 1;
        queue.push_back({x, y, z});
        while (!queue.empty()) {
          auto [cx, cy, cz] = queue.front();
          queue.pop_front();
          ++comp.voxels;
          sum += Eigen::Vector3d(cx, cy, cz);
          constexpr int steps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                       {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
          for (const auto& st : steps) {
            const int nx2 = cx + st[0], ny2 = cy + st[1], nz2 = cz + st[2];
            if (!v.contains(nx2, ny2, nz2)) continue;
            const size_t nidx = v.index(nx2, ny2, nz2);
            if (seen[nidx] || v.at(nx2, ny2, nz2) < threshold) continue;
            seen[nidx] = 1;
            queue.push_back({nx2, ny2, nz2});
          }
        }
        comp.centroid = sum / double(comp.voxels);
        comps.push_back(comp);
      }

  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.voxels > b.voxels; });
  return comps;
}

std::vector<Detection> detect(const Volume& v, const IntensityWindow& iw, DetectParams params,
                              EvalCounter* counter) {
  if (params.method == Method::Quadrant && !v.is_2d())
    throw std::invalid_argument("detect: quadrant method requires a 2D volume (nz == 1)");
  params.seeds.validate();

  const auto seeds = plan_seeds(v, params.seeds);
  std::vector<Detection> dets;

  if (params.method == Method::Quadrant) {
    // Quadrant scans its own scale range, so run one trajectory per position.
    QuadrantParams qp = params.quadrant;
    if (qp.scale_range.empty())
      for (double s : params.seeds.scales) qp.scale_range.push_back(int(std::lround(s)));
    std::vector<std::pair<Eigen::Vector2d, int>> positions;
    for (const auto& s : seeds) {
      if (!positions.empty() && positions.back().first.x() == s.position.x() &&
          positions.back().first.y() == s.position.y())
        continue;
      positions.push_back({{s.position.x(), s.position.y()}, s.index});
    }
    std::vector<Detection> results(positions.size());
    parallel_for(positions.size(), params.workers, [&](size_t i) {
      const auto r = quadrant_seek_one(v, positions[i].first, qp, iw, counter);
      Detection d;
      d.center = {r.position.x(), r.position.y(), 0.0};
      d.seed_index = positions[i].second;
      d.iterations = r.iterations;
      if (r.converged) d.flags |= kFlagConverged;
      if (r.degenerate) {
        d.flags |= kFlagDegenerate;
      } else {
        const double k = std::max(2.0, double(r.best_scale));
        const EllipsoidWindow win = EllipsoidWindow::isotropic(d.center, k, true);
        d.H = win.H;
        const auto p = try_candidate_histogram(v, win, iw, Kernel::Epanechnikov, counter);
        if (p) {
          d.entropy_bits = entropy_bits(*p);
          d.bhattacharyya = bhattacharyya(*p, Histogram::uniform(iw.bins));
        }
        try {
          d.pdf_diff = pdf_difference(v, win, iw, Kernel::Identity, counter);
        } catch (const std::invalid_argument&) {
          d.pdf_diff = 0.0;
        }
      }
      results[i] = d;
    });
    dets = std::move(results);
  } else if (params.method == Method::Shift) {
    std::vector<Detection> results(seeds.size());
    parallel_for(seeds.size(), params.workers, [&](size_t i) {
      ShiftParams sp = params.shift;
      const double s = seeds[i].scale;
      sp.half_extents = {s, s, v.is_2d() ? 1.0 : s};
      auto r = saliency_shift(v, seeds[i].position, sp, iw, counter);
      r.det.seed_index = seeds[i].index;
      results[i] = r.det;
    });
    dets = std::move(results);
  } else {
    std::vector<Detection> results(seeds.size());
    parallel_for(seeds.size(), params.workers, [&](size_t i) {
      const EllipsoidWindow seed_win =
          EllipsoidWindow::isotropic(seeds[i].position, seeds[i].scale, v.is_2d());
      auto r = abmsod_run(v, seed_win, params.abmsod, iw, counter);
      r.det.seed_index = seeds[i].index;
      results[i] = r.det;
    });
    dets = std::move(results);
  }

  // Drop degenerate results, then apply the population-quantile thresholds.
  std::vector<Detection> alive;
  for (auto& d : dets)
    if (!d.has(kFlagDegenerate) && d.entropy_bits > 0.0) alive.push_back(d);
  if (alive.empty()) return {};

  std::vector<double> entropies, pdfs;
  for (const auto& d : alive) {
    entropies.push_back(d.entropy_bits);
    pdfs.push_back(d.pdf_diff);
  }
  const double e_thresh = quantile_threshold(entropies, params.entropy_quantile);
  const double p_thresh = quantile_threshold(pdfs, params.pdf_quantile);

  std::vector<Detection> passed;
  for (const auto& d : alive)
    if (d.entropy_bits >= e_thresh && d.pdf_diff >= p_thresh) passed.push_back(d);

  return dedupe_top_k(std::move(passed), params.top_k, params.dedupe_radius);
}

}  // namespace salvox
