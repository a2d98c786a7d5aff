#include "dels/confidence.h"

#include <algorithm>
#include <cmath>

#include "dels/common.h"

namespace dels {

Raster CombineLevels(const std::array<Raster, kPyramidLevels>& levels) {
  const Raster& fine = levels[0];
  for (int j = 0; j < kPyramidLevels; ++j) {
    const int expected_w = (fine.width() + (1 << j) - 1) >> j;
    const int expected_h = (fine.height() + (1 << j) - 1) >> j;
    DELS_CHECK(levels[j].channels() == 1 && levels[j].width() == expected_w &&
                   levels[j].height() == expected_h,
               DimensionMismatch,
               "entropy level " + std::to_string(j) +
                   " does not match the pyramid shape");
  }
  const Raster half = NnUpsampleX2(levels[2], levels[1].width(),
                                   levels[1].height());
  const Raster from_quarter = NnUpsampleX2(half, fine.width(), fine.height());
  const Raster from_half = NnUpsampleX2(levels[1], fine.width(), fine.height());
  Raster sum(fine.width(), fine.height());
  for (int y = 0; y < fine.height(); ++y) {
    for (int x = 0; x < fine.width(); ++x) {
      sum.at(x, y) =
          from_quarter.at(x, y) + from_half.at(x, y) + fine.at(x, y);
    }
  }
  return sum;
}

double MaxCombinedEntropy(int k) {
  return 3.0 * std::log(static_cast<double>(k));
}

Raster ApplyOuterOverride(const Raster& c_tilde, const Grid<int>& last_partition,
                          int k) {
  DELS_CHECK(c_tilde.width() == last_partition.width() &&
                 c_tilde.height() == last_partition.height(),
             DimensionMismatch, "partition map does not match entropy map");
  Raster out = c_tilde;
  const double max_entropy = MaxCombinedEntropy(k);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const int l = last_partition.at(x, y);
      if (l == 0 || l == k - 1) out.at(x, y) = max_entropy;
    }
  }
  return out;
}

Raster ScoreConfidence(
    const Raster& c_tilde, int k,
    const std::optional<ConfidenceCalibration>& calibration) {
  Raster out(c_tilde.width(), c_tilde.height());
  const double max_entropy = MaxCombinedEntropy(k);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      double c = std::clamp(1.0 - c_tilde.at(x, y) / max_entropy, 0.0, 1.0);
      if (calibration) {
        c = 1.0 / (1.0 + std::exp(-(calibration->scale * c +
                                    calibration->offset)));
      }
      out.at(x, y) = c;
    }
  }
  return out;
}

Raster EstimateConfidence(
    const DepthEstimate& estimate, int k,
    const std::optional<ConfidenceCalibration>& calibration) {
  Raster confidence = ScoreConfidence(
      ApplyOuterOverride(estimate.confidence_raw, estimate.last_partition, k),
      k, calibration);
  for (int y = 0; y < confidence.height(); ++y) {
    for (int x = 0; x < confidence.width(); ++x) {
      if (estimate.occluded.at(x, y) ||
          !std::isfinite(estimate.depth.at(x, y))) {
        confidence.at(x, y) = 0.0;
      }
    }
  }
  return confidence;
}

}  // namespace dels
