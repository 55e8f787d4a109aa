#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "salvox/abmsod.hpp"
#include "salvox/detection.hpp"
#include "salvox/phantom.hpp"
#include "salvox/quadrant.hpp"
#include "salvox/seeds.hpp"
#include "salvox/shift.hpp"
#include "salvox/volume.hpp"

namespace salvox {

enum class Method { Quadrant, Shift, Abmsod };

Method method_from_name(const std::string& name);
const char* method_name(Method m);

/// Dense saliency map: per-voxel score entropy * inter-scale pdf change,
/// maximized over scales.
struct SaliencyMap {
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<float> score;       // row-major, x fastest
  std::vector<float> best_scale;  // argmax scale per voxel
};

struct SaliencyMaximum {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double score = 0.0;
  double scale = 0.0;
};

struct ExhaustiveResult {
  SaliencyMap map;
  std::vector<SaliencyMaximum> maxima;  // strict local maxima, score-descending
};

/// Scores every voxel at every scale with isotropic windows (the classic
/// dense scan the seek methods avoid). Guarded by an evaluation budget of
/// 2e6 voxel-scale pairs. Serves as the oracle the iterative methods are
/// checked against. The identity kernel concentrates the inter-scale
/// difference on the annulus between the flanking supports, which localizes
/// maxima sharply.
ExhaustiveResult kadir_brady_exhaustive(const Volume& v, const IntensityWindow& iw,
                                        const std::vector<double>& scales,
                                        Kernel kernel = Kernel::Identity,
                                        EvalCounter* counter = nullptr,
                                        uint64_t budget = 2'000'000);

/// Greedy radius suppression: sort by pdf_diff descending, keep a detection
/// when it is farther than `radius` from everything already kept, stop at k.
std::vector<Detection> dedupe_top_k(std::vector<Detection> dets, int k, double radius);

/// Rasterizes the window support into sorted linear indices.
std::vector<uint64_t> rasterize_window(const Volume& frame, const EllipsoidWindow& win);

/// Jaccard index |A∩B| / |A∪B| over sorted voxel index sets.
double jaccard(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
double jaccard(const Volume& frame, const EllipsoidWindow& win, const std::vector<uint64_t>& mask);

/// Picks the detection whose axial appearance best matches the template:
/// Hu vectors are computed on `slices` axial crops about the window's central
/// slice and compared by mean Euclidean distance. Returns the argmin index.
size_t hu_filter(const std::vector<Detection>& dets, const Volume& v, const Volume& template_2d,
                 int slices = 5);

/// Per-detection mean Hu distance to the template (same slicing as hu_filter).
double hu_template_distance(const Detection& det, const Volume& v, const Volume& template_2d,
                            int slices = 5);

/// Trivial intensity-threshold + connected-components baseline (6-neighbor).
/// Components are returned largest first as (centroid, voxel count).
struct ThresholdComponent {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  uint64_t voxels = 0;
};
std::vector<ThresholdComponent> threshold_baseline(const Volume& v, double threshold);

/// End-to-end detection parameters. Thresholds are population quantiles:
/// detections must reach the entropy quantile (default: top 10%) and the
/// pdf-difference quantile before dedupe ranking. Zero-entropy results never
/// count as salient.
struct DetectParams {
  Method method = Method::Shift;
  SeedPlan seeds;
  int top_k = 20;
  double dedupe_radius = 5.0;
  double entropy_quantile = 0.9;
  double pdf_quantile = 0.0;
  unsigned workers = 1;
  QuadrantParams quadrant;
  ShiftParams shift;
  AbmsodParams abmsod;
};

/// plan_seeds -> per-seed seek (parallel map, deterministic order) ->
/// entropy/pdf thresholds -> dedupe_top_k.
std::vector<Detection> detect(const Volume& v, const IntensityWindow& iw, DetectParams params,
                              EvalCounter* counter = nullptr);

}  // namespace salvox
