#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dels/common.h"

namespace dels {

// Row-major, channel-interleaved image of doubles.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels = 1, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c = 0) {
    return data_[Index(x, y) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const {
    return data_[Index(x, y) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool SameShape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  // One channel as a new single-channel raster.
  Raster Channel(int c) const;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Single-valued per-pixel map for search bookkeeping.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width),
        height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }

  typename std::vector<T>::reference at(int x, int y) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  typename std::vector<T>::const_reference at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  const std::vector<T>& values() const { return data_; }
  std::vector<T>& values() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Bilinear interpolation. Positions outside [0, w-1] x [0, h-1] set the
// returned flag and leave the output zeroed.
struct BilinearSample {
  std::vector<double> values;
  bool out_of_bounds = false;
};

BilinearSample SampleBilinear(const Raster& raster,
                              const Eigen::Vector2d& position);

// Allocation-free variant; `out` must hold raster.channels() values.
// Returns false when out of bounds.
bool SampleBilinearInto(const Raster& raster, double x, double y,
                        std::span<double> out);

inline bool InsideRaster(int width, int height, double x, double y) {
  return x >= 0.0 && y >= 0.0 && x <= width - 1 && y <= height - 1;
}

inline constexpr int kPyramidLevels = 3;

struct Pyramid {
  std::array<Raster, kPyramidLevels> levels;

  const Raster& operator[](int level) const { return levels[level]; }
};

// Three levels of 2x2 box downsampling, level j sized ceil(w / 2^j). Throws
// TooSmall when the coarsest level would drop below 4x4.
Pyramid BuildPyramid(const Raster& raster);

// 2x2 box average; odd trailing rows/columns average the pixels available.
Raster Downsample2x2(const Raster& raster);

// Each pixel replicated into a 2x2 block, cropped to target size.
Raster NnUpsampleX2(const Raster& raster, int target_width, int target_height);
inline Raster NnUpsampleX2(const Raster& raster) {
  return NnUpsampleX2(raster, 2 * raster.width(), 2 * raster.height());
}

template <typename T>
Grid<T> NnUpsampleX2(const Grid<T>& grid, int target_width,
                     int target_height) {
  Grid<T> out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const int sy = std::min(y / 2, grid.height() - 1);
    for (int x = 0; x < target_width; ++x) {
      out.at(x, y) = grid.at(std::min(x / 2, grid.width() - 1), sy);
    }
  }
  return out;
}

// Matching channels: intensity plus x and y Sobel derivatives (kernel
// normalized by 1/8 so each is a per-pixel derivative estimate).
inline constexpr int kFeatureChannels = 3;
Raster ComputeMatchingFeatures(const Raster& gray);

struct FeaturePyramid {
  Pyramid intensity;
  std::array<Raster, kPyramidLevels> features;
};

FeaturePyramid BuildFeaturePyramid(const Raster& gray);

}  // namespace dels
