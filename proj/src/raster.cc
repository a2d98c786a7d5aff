#include "dels/raster.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace dels {

Raster::Raster(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  DELS_CHECK(width > 0 && height > 0 && channels > 0, DimensionMismatch,
             "raster dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster Raster::Channel(int c) const {
  Raster out(width_, height_, 1);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      out.at(x, y) = at(x, y, c);
    }
  }
  return out;
}

bool SampleBilinearInto(const Raster& raster, double x, double y,
                        std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (!InsideRaster(raster.width(), raster.height(), x, y)) {
    return false;
  }
  const int x0 = std::min(static_cast<int>(x), raster.width() - 1);
  const int y0 = std::min(static_cast<int>(y), raster.height() - 1);
  const int x1 = std::min(x0 + 1, raster.width() - 1);
  const int y1 = std::min(y0 + 1, raster.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w10 = fx * (1.0 - fy);
  const double w01 = (1.0 - fx) * fy;
  const double w11 = fx * fy;
  for (int c = 0; c < raster.channels(); ++c) {
    out[c] = w00 * raster.at(x0, y0, c) + w10 * raster.at(x1, y0, c) +
             w01 * raster.at(x0, y1, c) + w11 * raster.at(x1, y1, c);
  }
  return true;
}

BilinearSample SampleBilinear(const Raster& raster,
                              const Eigen::Vector2d& position) {
  BilinearSample sample;
  sample.values.assign(raster.channels(), 0.0);
  sample.out_of_bounds =
      !SampleBilinearInto(raster, position.x(), position.y(), sample.values);
  return sample;
}

Raster Downsample2x2(const Raster& raster) {
  const int w = (raster.width() + 1) / 2;
  const int h = (raster.height() + 1) / 2;
  Raster out(w, h, raster.channels());
  for (int y = 0; y < h; ++y) {
    const int ya = 2 * y;
    const int yb = std::min(2 * y + 1, raster.height() - 1);
    for (int x = 0; x < w; ++x) {
      const int xa = 2 * x;
      const int xb = std::min(2 * x + 1, raster.width() - 1);
      const double count = (ya == yb ? 1.0 : 2.0) * (xa == xb ? 1.0 : 2.0);
      for (int c = 0; c < raster.channels(); ++c) {
        double sum = raster.at(xa, ya, c);
        if (xb != xa) sum += raster.at(xb, ya, c);
        if (yb != ya) sum += raster.at(xa, yb, c);
        if (xb != xa && yb != ya) sum += raster.at(xb, yb, c);
        out.at(x, y, c) = sum / count;
      }
    }
  }
  return out;
}

Pyramid BuildPyramid(const Raster& raster) {
  const int coarse_w = (raster.width() + 3) / 4;
  const int coarse_h = (raster.height() + 3) / 4;
  if (coarse_w < 4 || coarse_h < 4) {
    throw TooSmall("pyramid level 2 would be " + std::to_string(coarse_w) +
                   "x" + std::to_string(coarse_h) + ", need at least 4x4");
  }
  Pyramid pyramid;
  pyramid.levels[0] = raster;
  for (int j = 1; j < kPyramidLevels; ++j) {
    pyramid.levels[j] = Downsample2x2(pyramid.levels[j - 1]);
  }
  return pyramid;
}

Raster NnUpsampleX2(const Raster& raster, int target_width,
                    int target_height) {
  Raster out(target_width, target_height, raster.channels());
  for (int y = 0; y < target_height; ++y) {
    const int sy = std::min(y / 2, raster.height() - 1);
    for (int x = 0; x < target_width; ++x) {
      const int sx = std::min(x / 2, raster.width() - 1);
      for (int c = 0; c < raster.channels(); ++c) {
        out.at(x, y, c) = raster.at(sx, sy, c);
      }
    }
  }
  return out;
}

Raster ComputeMatchingFeatures(const Raster& gray) {
  const int w = gray.width();
  const int h = gray.height();
  Raster out(w, h, kFeatureChannels);
  auto px = [&](int x, int y) {
    return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) +
                         px(x + 1, y + 1) - px(x - 1, y - 1) -
                         2.0 * px(x - 1, y) - px(x - 1, y + 1)) /
                        8.0;
      const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) +
                         px(x + 1, y + 1) - px(x - 1, y - 1) -
                         2.0 * px(x, y - 1) - px(x + 1, y - 1)) /
                        8.0;
      out.at(x, y, 0) = gray.at(x, y);
      out.at(x, y, 1) = gx;
      out.at(x, y, 2) = gy;
    }
  }
  return out;
}

FeaturePyramid BuildFeaturePyramid(const Raster& gray) {
  DELS_CHECK(gray.channels() == 1, DimensionMismatch,
             "feature pyramid expects a single-channel image");
  FeaturePyramid fp;
  fp.intensity = BuildPyramid(gray);
  for (int j = 0; j < kPyramidLevels; ++j) {
    fp.features[j] = ComputeMatchingFeatures(fp.intensity[j]);
  }
  return fp;
}

}  // namespace dels
