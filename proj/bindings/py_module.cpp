#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "salvox/abmsod.hpp"
#include "salvox/histogram.hpp"
#include "salvox/hu.hpp"
#include "salvox/meta_io.hpp"
#include "salvox/phantom.hpp"
#include "salvox/pipeline.hpp"
#include "salvox/quadrant.hpp"
#include "salvox/shift.hpp"

namespace py = pybind11;
using namespace salvox;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

/// numpy convention: arrays are indexed [z, y, x]; Volume stores x fastest.
Volume volume_from_array(const FloatArray& arr, Eigen::Vector3d spacing) {
  const auto buf = arr.request();
  int nx = 1, ny = 1, nz = 1;
  if (buf.ndim == 3) {
    nz = int(buf.shape[0]);
    ny = int(buf.shape[1]);
    nx = int(buf.shape[2]);
  } else if (buf.ndim == 2) {
    ny = int(buf.shape[0]);
    nx = int(buf.shape[1]);
  } else {
    throw std::invalid_argument("expected a 2D or 3D array");
  }
  Volume v(nx, ny, nz, spacing);
  std::memcpy(v.data().data(), buf.ptr, sizeof(float) * v.size());
  return v;
}

py::array_t<float> array_from_volume(const Volume& v) {
  py::array_t<float> arr({v.nz(), v.ny(), v.nx()});
  std::memcpy(arr.mutable_data(), v.data().data(), sizeof(float) * v.size());
  return arr;
}

Histogram histogram_from_array(const py::array_t<double>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 1) throw std::invalid_argument("expected a 1D histogram");
  Histogram h(int(buf.shape[0]));
  const double* p = static_cast<const double*>(buf.ptr);
  std::copy(p, p + buf.shape[0], h.p.begin());
  h.normalize();
  return h;
}

py::dict detection_to_dict(const Detection& d) {
  py::dict out;
  out["center"] = py::make_tuple(d.center.x(), d.center.y(), d.center.z());
  out["H"] = d.H;
  out["entropy_bits"] = d.entropy_bits;
  out["pdf_diff"] = d.pdf_diff;
  out["bhattacharyya"] = d.bhattacharyya;
  out["iterations"] = d.iterations;
  out["flags"] = d.flag_names();
  out["seed_index"] = d.seed_index;
  return out;
}

IntensityWindow window_or_full(const Volume& v, std::optional<double> low,
                               std::optional<double> high, int bins) {
  if (low && high) return IntensityWindow(*low, *high, bins);
  return IntensityWindow::full_range(v, bins);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "salient-region detection in volumes via iterative entropy ascent";
  m.attr("__version__") = "0.1.0";

  m.def("entropy_bits", [](const py::array_t<double>& p) {
    return entropy_bits(histogram_from_array(p));
  }, py::arg("pmf"), "Shannon entropy (bits) of a pmf; normalizes the input mass.");

  m.def("entropy_nats", [](const py::array_t<double>& p) {
    return entropy_nats(histogram_from_array(p));
  }, py::arg("pmf"));

  m.def("mixture_entropy", &mixture_entropy, py::arg("alpha"), py::arg("bins"),
        "Closed-form entropy (nats) of the uniform/delta mixture at overlap alpha.");
  m.def("mixture_entropy_derivative", &mixture_entropy_derivative, py::arg("alpha"),
        py::arg("bins"));

  m.def("bhattacharyya", [](const py::array_t<double>& p, const py::array_t<double>& q) {
    return bhattacharyya(histogram_from_array(p), histogram_from_array(q));
  }, py::arg("p"), py::arg("q"));

  m.def("load_volume", [](const std::string& path) {
    const Volume v = load_volume(path);
    return py::make_tuple(array_from_volume(v), v.spacing());
  }, py::arg("path"), "Returns (array[z,y,x], spacing).");

  m.def("save_volume", [](const FloatArray& arr, const std::string& path,
                          Eigen::Vector3d spacing) {
    save_volume(volume_from_array(arr, spacing), path);
  }, py::arg("volume"), py::arg("path"), py::arg("spacing") = Eigen::Vector3d(1, 1, 1));

  m.def("make_phantom", [](const std::string& spec_json) {
    auto [v, gt] = make_phantom(PhantomSpec::from_json_text(spec_json));
    py::list regions;
    for (const auto& r : gt.regions) {
      py::dict d;
      d["center"] = py::make_tuple(r.center.x(), r.center.y(), r.center.z());
      d["H"] = r.H;
      py::array_t<uint64_t> mask(py::ssize_t(r.mask.size()));
      std::copy(r.mask.begin(), r.mask.end(), mask.mutable_data());
      d["mask"] = mask;
      regions.append(d);
    }
    return py::make_tuple(array_from_volume(v), regions);
  }, py::arg("spec_json"),
     "Builds a synthetic volume from a JSON spec; returns (array, ground truth regions).");

  m.def("candidate_histogram", [](const FloatArray& arr, Eigen::Vector3d center,
                                  Eigen::Matrix3d H, std::optional<double> low,
                                  std::optional<double> high, int bins,
                                  const std::string& kernel) {
    const Volume v = volume_from_array(arr, {1, 1, 1});
    const Histogram h = candidate_histogram(v, {center, H}, window_or_full(v, low, high, bins),
                                            kernel_from_name(kernel));
    py::array_t<double> out(h.bins());
    std::copy(h.p.begin(), h.p.end(), out.mutable_data());
    return out;
  }, py::arg("volume"), py::arg("center"), py::arg("H"), py::arg("window_low") = std::nullopt,
     py::arg("window_high") = std::nullopt, py::arg("bins") = 64,
     py::arg("kernel") = "epanechnikov");

  m.def("pdf_difference", [](const FloatArray& arr, Eigen::Vector3d center, double scale,
                             std::optional<double> low, std::optional<double> high, int bins,
                             const std::string& kernel) {
    const Volume v = volume_from_array(arr, {1, 1, 1});
    return pdf_difference(v, center, window_or_full(v, low, high, bins), scale,
                          kernel_from_name(kernel));
  }, py::arg("volume"), py::arg("center"), py::arg("scale"),
     py::arg("window_low") = std::nullopt, py::arg("window_high") = std::nullopt,
     py::arg("bins") = 64, py::arg("kernel") = "identity");

  m.def("hu_moments", [](const FloatArray& img) {
    const Volume v = volume_from_array(img, {1, 1, 1});
    const HuVector h = hu_moments(v);
    py::array_t<double> out(7);
    std::copy(h.begin(), h.end(), out.mutable_data());
    return out;
  }, py::arg("image"), "Seven moment invariants of a 2D image.");

  m.def("saliency_shift", [](const FloatArray& arr, Eigen::Vector3d seed,
                             Eigen::Vector3d half_extents, std::optional<double> low,
                             std::optional<double> high, int bins, int max_iters,
                             double min_step) {
    const Volume v = volume_from_array(arr, {1, 1, 1});
    ShiftParams params;
    params.half_extents = half_extents;
    params.max_iters = max_iters;
    params.min_step = min_step;
    return detection_to_dict(
        saliency_shift(v, seed, params, window_or_full(v, low, high, bins)).det);
  }, py::arg("volume"), py::arg("seed"), py::arg("half_extents"),
     py::arg("window_low") = std::nullopt, py::arg("window_high") = std::nullopt,
     py::arg("bins") = 64, py::arg("max_iters") = 50, py::arg("min_step") = 0.1);

  m.def("abmsod", [](const FloatArray& arr, Eigen::Vector3d seed, double radius,
                     std::optional<double> low, std::optional<double> high, int bins,
                     int max_iterations, double threshold) {
    const Volume v = volume_from_array(arr, {1, 1, 1});
    AbmsodParams params;
    params.max_iterations = max_iterations;
    params.threshold = threshold;
    const auto seed_win = EllipsoidWindow::isotropic(seed, radius, v.is_2d());
    return detection_to_dict(
        abmsod_run(v, seed_win, params, window_or_full(v, low, high, bins)).det);
  }, py::arg("volume"), py::arg("seed"), py::arg("radius"),
     py::arg("window_low") = std::nullopt, py::arg("window_high") = std::nullopt,
     py::arg("bins") = 64, py::arg("max_iterations") = 15, py::arg("threshold") = 1e-4);

  m.def("kadir_brady_exhaustive", [](const FloatArray& arr, const std::vector<double>& scales,
                                     std::optional<double> low, std::optional<double> high,
                                     int bins) {
    const Volume v = volume_from_array(arr, {1, 1, 1});
    const auto res = kadir_brady_exhaustive(v, window_or_full(v, low, high, bins), scales);
    py::array_t<float> score({v.nz(), v.ny(), v.nx()});
    std::memcpy(score.mutable_data(), res.map.score.data(), sizeof(float) * v.size());
    py::list maxima;
    for (const auto& mx : res.maxima) {
      py::dict d;
      d["position"] = py::make_tuple(mx.position.x(), mx.position.y(), mx.position.z());
      d["score"] = mx.score;
      d["scale"] = mx.scale;
      maxima.append(d);
    }
    return py::make_tuple(score, maxima);
  }, py::arg("volume"), py::arg("scales"), py::arg("window_low") = std::nullopt,
     py::arg("window_high") = std::nullopt, py::arg("bins") = 64,
     "Dense scan oracle; returns (score map, ranked local maxima).");

  m.def("detect", [](const FloatArray& arr, const std::string& method, double seed_spacing,
                     const std::vector<double>& scales, int k, double dedupe_radius,
                     std::optional<double> low, std::optional<double> high, int bins,
                     double entropy_quantile, double pdf_quantile, unsigned workers) {
    const Volume v = volume_from_array(arr, {1, 1, 1});
    DetectParams params;
    params.method = method_from_name(method);
    params.seeds.spacing = seed_spacing;
    params.seeds.scales = scales;
    params.top_k = k;
    params.dedupe_radius = dedupe_radius;
    params.entropy_quantile = entropy_quantile;
    params.pdf_quantile = pdf_quantile;
    params.workers = workers;
    for (double s : scales) params.quadrant.scale_range.push_back(int(std::lround(s)));
    py::list out;
    for (const auto& d : detect(v, window_or_full(v, low, high, bins), params))
      out.append(detection_to_dict(d));
    return out;
  }, py::arg("volume"), py::arg("method") = "shift", py::arg("seed_spacing") = 16.0,
     py::arg("scales") = std::vector<double>{8.0}, py::arg("k") = 20,
     py::arg("dedupe_radius") = 5.0, py::arg("window_low") = std::nullopt,
     py::arg("window_high") = std::nullopt, py::arg("bins") = 64,
     py::arg("entropy_quantile") = 0.9, py::arg("pdf_quantile") = 0.0, py::arg("workers") = 1,
     "Seed, seek, threshold and dedupe in one call; returns detection dicts.");
}
