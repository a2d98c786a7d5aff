#include "dels/harness/oracle.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dels/common.h"

namespace dels {

ScanRange ResidualScanRange(const EpipolarFrame& frame, double min_depth,
                            double max_depth) {
  const auto far = DepthToResidual(frame, max_depth);
  const auto near = DepthToResidual(frame, min_depth);
  if (!far.ok() || !near.ok()) return {};
  return {std::min(far.value, near.value), std::max(far.value, near.value),
          true};
}

namespace {

// Score of one source position; returns false when any tap is outside.
bool PatchScore(const Raster& ref, const Raster& src, const Eigen::Vector2i& pixel,
                const Eigen::Vector2d& at, int radius, double* score) {
  const int channels = ref.channels();
  const int side = 2 * radius + 1;
  const int n = side * side;
  std::vector<double> a(static_cast<std::size_t>(n) * channels);
  std::vector<double> b(a.size());
  std::vector<double> tap(channels);
  int t = 0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx, ++t) {
      const int rx = std::clamp(pixel.x() + dx, 0, ref.width() - 1);
      const int ry = std::clamp(pixel.y() + dy, 0, ref.height() - 1);
      if (!SampleBilinearInto(src, at.x() + dx, at.y() + dy, tap)) {
        return false;
      }
      for (int c = 0; c < channels; ++c) {
        a[t * channels + c] = ref.at(rx, ry, c);
        b[t * channels + c] = tap[c];
      }
    }
  }
  double cross = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (int c = 0; c < channels; ++c) {
    double ma = 0.0;
    double mb = 0.0;
    for (int i = 0; i < n; ++i) {
      ma += a[i * channels + c];
      mb += b[i * channels + c];
    }
    ma /= n;
    mb /= n;
    for (int i = 0; i < n; ++i) {
      const double da = a[i * channels + c] - ma;
      const double db = b[i * channels + c] - mb;
      cross += da * db;
      va += da * da;
      vb += db * db;
    }
  }
  *score = (va <= 1e-14 || vb <= 1e-14) ? 0.0 : cross / std::sqrt(va * vb);
  return true;
}

}  // namespace

ScanResult BruteForceResidual(const Raster& ref_features,
                              const Raster& src_features,
                              const Eigen::Vector2i& pixel,
                              const EpipolarFrame& frame, double scan_min,
                              double scan_max, double step, int patch_radius) {
  DELS_CHECK(step > 0.0, InvalidConfig, "scan step must be positive");
  ScanResult result;
  double lowest = 0.0;
  bool any = false;
  const long count = static_cast<long>(std::floor((scan_max - scan_min) / step));
  for (long i = 0; i <= count; ++i) {
    const double offset = scan_min + i * step;
    double score = 0.0;
    if (!PatchScore(ref_features, src_features, pixel, frame.PointAt(offset),
                    patch_radius, &score)) {
      continue;
    }
    if (!any || score > result.best_score) {
      result.best_score = score;
      result.residual = offset;
    }
    lowest = any ? std::min(lowest, score) : score;
    any = true;
  }
  result.discriminative = any && result.best_score - lowest >= 1e-6;
  return result;
}

}  // namespace dels
