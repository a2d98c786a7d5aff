#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dels/raster.h"
#include "dels/search.h"

namespace dels {

struct EvalReport {
  std::size_t pixels = 0;  // pixels with ground truth inside the mask
  std::size_t valid = 0;   // of those, pixels with a finite estimate
  std::vector<double> quantile_levels = {0.5, 0.9};
  // Over valid pixels only.
  std::vector<double> rel_error_quantiles;
  std::vector<double> abs_error_quantiles;
  std::vector<double> residual_error_quantiles;  // px, when frames are known
  // Median relative error with invalid pixels counted as +inf.
  double median_rel_error_all = 0.0;
  // (threshold, fraction of all evaluated pixels with relative error below).
  std::vector<std::pair<double, double>> completeness;
  double runtime_s = 0.0;

  double valid_fraction() const {
    return pixels == 0 ? 0.0 : static_cast<double>(valid) / pixels;
  }
  double CompletenessAt(double threshold) const;
  std::string Format() const;
};

// Nearest-rank quantile of an unsorted sample; +inf entries are allowed.
double Quantile(std::vector<double> values, double q);

// Pixels where the ground truth is finite and positive and, when given, the
// mask is set.
EvalReport EvaluateDepth(const Raster& estimate, const Raster& gt,
                         const Grid<std::uint8_t>* mask = nullptr,
                         const std::vector<double>& thresholds = {0.01, 0.02,
                                                                  0.05});

// |residual - e_gt| per evaluated pixel; +inf where either side is missing.
std::vector<double> ResidualErrors(const DepthEstimate& estimate,
                                   const Raster& gt,
                                   const Grid<std::uint8_t>* mask = nullptr);

// Same as EvaluateDepth plus residual error quantiles.
EvalReport EvaluateEstimate(const DepthEstimate& estimate, const Raster& gt,
                            const Grid<std::uint8_t>* mask = nullptr);

struct PlaneFit {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double rms = 0.0;
};

// Total least-squares plane through the points. Throws InvalidConfig with
// fewer than three points.
PlaneFit FitPlane(const std::vector<Eigen::Vector3d>& points);

}  // namespace dels
