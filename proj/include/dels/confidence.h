#pragma once

#include <array>
#include <optional>

#include "dels/raster.h"
#include "dels/search.h"
#include "dels/weights.h"

namespace dels {

// Sum of the per-level mean entropies at full resolution: level 2 upsampled
// twice, level 1 once. Level j must be sized ceil(w0 / 2^j) x ceil(h0 / 2^j).
Raster CombineLevels(const std::array<Raster, kPyramidLevels>& levels);

// Largest attainable combined entropy, 3 ln k.
double MaxCombinedEntropy(int k);

// Pixels whose final partition is outer get the maximum combined entropy.
Raster ApplyOuterOverride(const Raster& c_tilde, const Grid<int>& last_partition,
                          int k);

// clamp(1 - c / (3 ln k), 0, 1), optionally passed through
// sigmoid(scale * x + offset).
Raster ScoreConfidence(
    const Raster& c_tilde, int k,
    const std::optional<ConfidenceCalibration>& calibration = std::nullopt);

// Override, score and calibration for one estimate. Pixels whose final
// partition is outer, or that could not be estimated, end at exactly 0.
Raster EstimateConfidence(
    const DepthEstimate& estimate, int k,
    const std::optional<ConfidenceCalibration>& calibration = std::nullopt);

}  // namespace dels
