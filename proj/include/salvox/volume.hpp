#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace salvox {

/// 3D scalar grid with physical spacing. Data is row-major, x fastest.
/// A 2D image is a Volume with nz == 1. Intensities are stored as float;
/// integer file payloads are widened on load.
class Volume {
 public:
  Volume() = default;

  Volume(int nx, int ny, int nz, Eigen::Vector3d spacing = {1.0, 1.0, 1.0})
      : nx_(nx), ny_(ny), nz_(nz), spacing_(std::move(spacing)) {
    if (nx_ < 1 || ny_ < 1 || nz_ < 1)
      throw std::invalid_argument("Volume: dims must be >= 1");
    if (spacing_.minCoeff() <= 0.0)
      throw std::invalid_argument("Volume: spacing must be > 0");
    data_.assign(static_cast<size_t>(nx_) * ny_ * nz_, 0.0f);
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  size_t size() const { return data_.size(); }
  bool is_2d() const { return nz_ == 1; }

  const Eigen::Vector3d& spacing() const { return spacing_; }
  void set_spacing(const Eigen::Vector3d& s) {
    if (s.minCoeff() <= 0.0) throw std::invalid_argument("spacing must be > 0");
    spacing_ = s;
  }

  size_t index(int x, int y, int z) const {
    return static_cast<size_t>(x) +
           static_cast<size_t>(nx_) * (static_cast<size_t>(y) + static_cast<size_t>(ny_) * z);
  }

  bool contains(int x, int y, int z) const {
    return x >= 0 && x < nx_ && y >= 0 && y < ny_ && z >= 0 && z < nz_;
  }

  /// True when a (possibly fractional) position lies within the voxel-center box.
  bool contains_point(const Eigen::Vector3d& p) const {
    return p.x() >= 0.0 && p.x() <= nx_ - 1 && p.y() >= 0.0 && p.y() <= ny_ - 1 &&
           p.z() >= 0.0 && p.z() <= nz_ - 1;
  }

  Eigen::Vector3d clamp_point(Eigen::Vector3d p) const {
    p.x() = std::clamp(p.x(), 0.0, double(nx_ - 1));
    p.y() = std::clamp(p.y(), 0.0, double(ny_ - 1));
    p.z() = std::clamp(p.z(), 0.0, double(nz_ - 1));
    return p;
  }

  float at(int x, int y, int z) const { return data_[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data_[index(x, y, z)]; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  /// Observed (min, max) intensity.
  std::pair<float, float> intensity_range() const {
    float lo = data_.empty() ? 0.0f : data_[0];
    float hi = lo;
    for (float v : data_) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }

 private:
  int nx_ = 0, ny_ = 0, nz_ = 0;
  Eigen::Vector3d spacing_{1.0, 1.0, 1.0};
  std::vector<float> data_;
};

/// Intensity range of interest, mapped onto a fixed number of histogram bins.
/// Out-of-window intensities clamp to the first/last bin so every voxel
/// contributes to exactly one bin.
struct IntensityWindow {
  double low = 0.0;
  double high = 1.0;
  int bins = 64;

  IntensityWindow() = default;
  IntensityWindow(double lo, double hi, int m) : low(lo), high(hi), bins(m) {
    if (!(low < high)) throw std::invalid_argument("IntensityWindow: low must be < high");
    if (bins < 2) throw std::invalid_argument("IntensityWindow: bins must be >= 2");
  }

  int bin_of(double intensity) const {
    const int b = static_cast<int>(std::floor((intensity - low) / (high - low) * bins));
    return std::clamp(b, 0, bins - 1);
  }

  /// Window covering the full observed range of a volume.
  static IntensityWindow full_range(const Volume& v, int bins) {
    auto [lo, hi] = v.intensity_range();
    if (!(lo < hi)) hi = lo + 1.0f;  // constant volume: any window works
    return IntensityWindow(lo, hi, bins);
  }
};

}  // namespace salvox
