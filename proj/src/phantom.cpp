#include "salvox/phantom.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include "salvox/rng.hpp"

namespace salvox {

using nlohmann::json;

namespace {

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Matrix3d mat3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3x3 matrix");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw std::runtime_error("expected a 3x3 matrix");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json mat3_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::runtime_error("unknown key '" + it.key() + "' in " + where);
  }
}

FillSpec fill_from(const json& j) {
  reject_unknown_keys(j, {"type", "levels", "value"}, "fill");
  FillSpec f;
  const std::string type = j.at("type").get<std::string>();
  if (type == "uniform") {
    f.type = FillSpec::Type::Uniform;
    f.levels = j.value("levels", 64);
    if (f.levels < 2) throw std::runtime_error("fill.levels must be >= 2");
  } else if (type == "constant") {
    f.type = FillSpec::Type::Constant;
    f.value = j.at("value").get<double>();
  } else {
    throw std::runtime_error("unknown fill type '" + type + "'");
  }
  return f;
}

json fill_json(const FillSpec& f) {
  if (f.type == FillSpec::Type::Uniform) return {{"type", "uniform"}, {"levels", f.levels}};
  return {{"type", "constant"}, {"value", f.value}};
}

/// Mahalanobis membership matrix for a region (unit-ball form).
Eigen::Matrix3d region_H(const RegionSpec& r) {
  switch (r.shape) {
    case RegionSpec::Shape::Box:
      return r.half_extents.cwiseProduct(r.half_extents).asDiagonal();
    case RegionSpec::Shape::Ball:
      return Eigen::Matrix3d::Identity() * r.radius * r.radius;
    case RegionSpec::Shape::Ellipsoid:
      return r.axes * r.axes.transpose();
  }
  return Eigen::Matrix3d::Identity();
}

bool region_contains(const RegionSpec& r, const Eigen::Matrix3d& Hinv, int x, int y, int z) {
  const Eigen::Vector3d d(x - r.center.x(), y - r.center.y(), z - r.center.z());
  if (r.shape == RegionSpec::Shape::Box)
    return std::abs(d.x()) <= r.half_extents.x() && std::abs(d.y()) <= r.half_extents.y() &&
           std::abs(d.z()) <= r.half_extents.z();
  return d.dot(Hinv * d) <= 1.0;
}

/// Axis-aligned extents of the region support.
Eigen::Vector3d region_extents(const RegionSpec& r) {
  if (r.shape == RegionSpec::Shape::Box) return r.half_extents;
  return region_H(r).diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

PhantomSpec PhantomSpec::from_json_text(const std::string& text) {
  json j = json::parse(text);
  reject_unknown_keys(j, {"dims", "spacing", "background", "regions", "rng_seed"}, "phantom spec");

  PhantomSpec spec;
  const auto dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3) throw std::runtime_error("dims must be a 3-array");
  for (int i = 0; i < 3; ++i) spec.dims[i] = dims[i].get<int>();
  if (j.contains("spacing")) spec.spacing = vec3_from(j["spacing"]);

  if (j.contains("background")) {
    const auto& bg = j["background"];
    reject_unknown_keys(bg, {"type", "value", "mean", "sigma"}, "background");
    const std::string type = bg.at("type").get<std::string>();
    if (type == "constant") {
      spec.background.type = BackgroundSpec::Type::Constant;
      spec.background.value = bg.value("value", 0.0);
    } else if (type == "gaussian") {
      spec.background.type = BackgroundSpec::Type::Gaussian;
      spec.background.mean = bg.value("mean", 0.0);
      spec.background.sigma = bg.value("sigma", 1.0);
      if (spec.background.sigma <= 0.0) throw std::runtime_error("background.sigma must be > 0");
    } else {
      throw std::runtime_error("unknown background type '" + type + "'");
    }
  }

  for (const auto& rj : j.value("regions", json::array())) {
    reject_unknown_keys(rj, {"shape", "center", "half_extents", "radius", "axes", "fill"},
                        "region");
    RegionSpec r;
    const std::string shape = rj.at("shape").get<std::string>();
    r.center = vec3_from(rj.at("center"));
    if (shape == "box") {
      r.shape = RegionSpec::Shape::Box;
      r.half_extents = vec3_from(rj.at("half_extents"));
    } else if (shape == "ball") {
      r.shape = RegionSpec::Shape::Ball;
      r.radius = rj.at("radius").get<double>();
    } else if (shape == "ellipsoid") {
      r.shape = RegionSpec::Shape::Ellipsoid;
      r.axes = mat3_from(rj.at("axes"));
    } else {
      throw std::runtime_error("unknown region shape '" + shape + "'");
    }
    if (rj.contains("fill")) r.fill = fill_from(rj["fill"]);
    spec.regions.push_back(r);
  }

  spec.rng_seed = j.value("rng_seed", 0ULL);
  return spec;
}

std::string PhantomSpec::to_json_text() const {
  json j;
  j["dims"] = {dims[0], dims[1], dims[2]};
  j["spacing"] = vec3_json(spacing);
  if (background.type == BackgroundSpec::Type::Constant)
    j["background"] = {{"type", "constant"}, {"value", background.value}};
  else
    j["background"] = {{"type", "gaussian"}, {"mean", background.mean}, {"sigma", background.sigma}};
  j["regions"] = json::array();
  for (const auto& r : regions) {
    json rj;
    rj["center"] = vec3_json(r.center);
    switch (r.shape) {
      case RegionSpec::Shape::Box:
        rj["shape"] = "box";
        rj["half_extents"] = vec3_json(r.half_extents);
        break;
      case RegionSpec::Shape::Ball:
        rj["shape"] = "ball";
        rj["radius"] = r.radius;
        break;
      case RegionSpec::Shape::Ellipsoid:
        rj["shape"] = "ellipsoid";
        rj["axes"] = mat3_json(r.axes);
        break;
    }
    rj["fill"] = fill_json(r.fill);
    j["regions"].push_back(rj);
  }
  j["rng_seed"] = rng_seed;
  return j.dump(2);
}

std::string GroundTruth::to_json_text() const {
  json j;
  j["dims"] = {dims[0], dims[1], dims[2]};
  j["regions"] = json::array();
  for (const auto& r : regions) {
    json rj;
    rj["center"] = vec3_json(r.center);
    json hrow = json::array();
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) hrow.push_back(r.H(row, col));
    rj["H"] = hrow;
    // run-length encode the sorted mask indices
    json rle = json::array();
    size_t i = 0;
    while (i < r.mask.size()) {
      uint64_t start = r.mask[i];
      uint64_t len = 1;
      while (i + len < r.mask.size() && r.mask[i + len] == start + len) ++len;
      rle.push_back(start);
      rle.push_back(len);
      i += len;
    }
    rj["mask_rle"] = std::move(rle);
    j["regions"].push_back(std::move(rj));
  }
  return j.dump();
}

GroundTruth GroundTruth::from_json_text(const std::string& text) {
  json j = json::parse(text);
  GroundTruth gt;
  const auto& dims = j.at("dims");
  for (int i = 0; i < 3; ++i) gt.dims[i] = dims.at(i).get<int>();
  for (const auto& rj : j.at("regions")) {
    GroundTruthRegion r;
    r.center = vec3_from(rj.at("center"));
    const auto& hrow = rj.at("H");
    if (hrow.size() != 9) throw std::runtime_error("ground truth H must have 9 entries");
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) r.H(row, col) = hrow[row * 3 + col].get<double>();
    const auto& rle = rj.at("mask_rle");
    if (rle.size() % 2 != 0) throw std::runtime_error("mask_rle must have even length");
    for (size_t i = 0; i < rle.size(); i += 2) {
      const uint64_t start = rle[i].get<uint64_t>();
      const uint64_t len = rle[i + 1].get<uint64_t>();
      for (uint64_t k = 0; k < len; ++k) r.mask.push_back(start + k);
    }
    gt.regions.push_back(std::move(r));
  }
  return gt;
}

std::pair<Volume, GroundTruth> make_phantom(const PhantomSpec& spec) {
  Volume v(spec.dims[0], spec.dims[1], spec.dims[2], spec.spacing);
  Rng rng(spec.rng_seed);

  if (spec.background.type == BackgroundSpec::Type::Constant) {
    for (float& f : v.data()) f = float(spec.background.value);
  } else {
    for (float& f : v.data())
      f = float(spec.background.mean + spec.background.sigma * rng.next_gaussian());
  }

  GroundTruth gt;
  gt.dims = spec.dims;
  std::vector<uint8_t> occupied(v.size(), 0);

  for (const auto& r : spec.regions) {
    const Eigen::Vector3d ext = region_extents(r);
    for (int i = 0; i < 3; ++i) {
      if (r.center[i] - ext[i] < 0.0 || r.center[i] + ext[i] > spec.dims[i] - 1)
        throw std::runtime_error("make_phantom: region extends outside the volume");
    }
    const Eigen::Matrix3d H = region_H(r);
    Eigen::Matrix3d Hinv = Eigen::Matrix3d::Identity();
    if (r.shape != RegionSpec::Shape::Box) Hinv = H.inverse();

    GroundTruthRegion out;
    out.H = H;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();

    const int x0 = std::max(0, int(std::floor(r.center.x() - ext.x())));
    const int x1 = std::min(spec.dims[0] - 1, int(std::ceil(r.center.x() + ext.x())));
    const int y0 = std::max(0, int(std::floor(r.center.y() - ext.y())));
    const int y1 = std::min(spec.dims[1] - 1, int(std::ceil(r.center.y() + ext.y())));
    const int z0 = std::max(0, int(std::floor(r.center.z() - ext.z())));
    const int z1 = std::min(spec.dims[2] - 1, int(std::ceil(r.center.z() + ext.z())));

    for (int z = z0; z <= z1; ++z)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          if (!region_contains(r, Hinv, x, y, z)) continue;
          const size_t idx = v.index(x, y, z);
          if (occupied[idx]) throw std::runtime_error("make_phantom: regions overlap");
          occupied[idx] = 1;
          if (r.fill.type == FillSpec::Type::Uniform)
            v.data()[idx] = float(rng.next_below(uint64_t(r.fill.levels)));
          else
            v.data()[idx] = float(r.fill.value);
          out.mask.push_back(idx);
          centroid += Eigen::Vector3d(x, y, z);
        }

    if (out.mask.empty()) throw std::runtime_error("make_phantom: region rasterizes to no voxel");
    out.center = centroid / double(out.mask.size());
    gt.regions.push_back(std::move(out));
  }

  return {std::move(v), std::move(gt)};
}

}  // namespace salvox
