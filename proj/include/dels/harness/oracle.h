#pragma once

#include <Eigen/Core>

#include "dels/geometry.h"
#include "dels/raster.h"

namespace dels {

struct ScanResult {
  double residual = 0.0;  // offset along d with the best score
  double best_score = -1.0;
  bool discriminative = false;  // score spread over the scan >= 1e-6
};

// Exhaustive ZNCC scan along the epipolar line over [scan_min, scan_max] in
// steps of `step`. Patches are compared on every feature channel; offsets
// whose patch leaves the source image are skipped. Ties keep the first
// offset.
ScanResult BruteForceResidual(const Raster& ref_features,
                              const Raster& src_features,
                              const Eigen::Vector2i& pixel,
                              const EpipolarFrame& frame, double scan_min,
                              double scan_max, double step = 0.25,
                              int patch_radius = 3);

// Residual interval covered by the depth range at this pixel; nullopt-like
// failure is reported through `ok`.
struct ScanRange {
  double min = 0.0;
  double max = 0.0;
  bool ok = false;
};
ScanRange ResidualScanRange(const EpipolarFrame& frame, double min_depth,
                            double max_depth);

}  // namespace dels
