#include "dels/harness/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Eigenvalues>

#include "dels/common.h"

namespace dels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool HasTruth(const Raster& gt, const Grid<std::uint8_t>* mask, int x, int y) {
  const double d = gt.at(x, y);
  return std::isfinite(d) && d > 0.0 && (!mask || mask->at(x, y));
}

void CheckShapes(const Raster& a, const Raster& gt,
                 const Grid<std::uint8_t>* mask) {
  DELS_CHECK(a.width() == gt.width() && a.height() == gt.height(),
             DimensionMismatch, "estimate and ground truth differ in size");
  DELS_CHECK(!mask || (mask->width() == gt.width() &&
                       mask->height() == gt.height()),
             DimensionMismatch, "mask differs in size");
}

}  // namespace

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(std::clamp(q, 0.0, 1.0) * values.size()));
  return values[rank == 0 ? 0 : rank - 1];
}

double EvalReport::CompletenessAt(double threshold) const {
  for (const auto& [t, fraction] : completeness) {
    if (t == threshold) return fraction;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string EvalReport::Format() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "pixels %zu  valid %zu (%.4f)\n", pixels,
                valid, valid_fraction());
  out += line;
  for (std::size_t i = 0; i < quantile_levels.size(); ++i) {
    std::snprintf(line, sizeof(line),
                  "q%.2f  rel %.6g  abs %.6g", quantile_levels[i],
                  i < rel_error_quantiles.size() ? rel_error_quantiles[i] : 0.0,
                  i < abs_error_quantiles.size() ? abs_error_quantiles[i] : 0.0);
    out += line;
    if (i < residual_error_quantiles.size()) {
      std::snprintf(line, sizeof(line), "  residual %.6g px",
                    residual_error_quantiles[i]);
      out += line;
    }
    out += '\n';
  }
  std::snprintf(line, sizeof(line), "median rel (invalid = inf) %.6g\n",
                median_rel_error_all);
  out += line;
  for (const auto& [t, fraction] : completeness) {
    std::snprintf(line, sizeof(line), "completeness @%.3g  %.4f\n", t,
                  fraction);
    out += line;
  }
  std::snprintf(line, sizeof(line), "runtime %.3f s\n", runtime_s);
  out += line;
  return out;
}

EvalReport EvaluateDepth(const Raster& estimate, const Raster& gt,
                         const Grid<std::uint8_t>* mask,
                         const std::vector<double>& thresholds) {
  CheckShapes(estimate, gt, mask);
  EvalReport report;
  std::vector<double> rel_valid;
  std::vector<double> abs_valid;
  std::vector<double> rel_all;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!HasTruth(gt, mask, x, y)) continue;
      ++report.pixels;
      const double truth = gt.at(x, y);
      const double d = estimate.at(x, y);
      if (!std::isfinite(d) || d <= 0.0) {
        rel_all.push_back(kInf);
        continue;
      }
      ++report.valid;
      const double abs_err = std::abs(d - truth);
      abs_valid.push_back(abs_err);
      rel_valid.push_back(abs_err / truth);
      rel_all.push_back(abs_err / truth);
    }
  }
  for (double q : report.quantile_levels) {
    report.rel_error_quantiles.push_back(Quantile(rel_valid, q));
    report.abs_error_quantiles.push_back(Quantile(abs_valid, q));
  }
  report.median_rel_error_all = Quantile(rel_all, 0.5);
  for (double t : thresholds) {
    const auto hits = std::count_if(rel_all.begin(), rel_all.end(),
                                    [t](double e) { return e < t; });
    report.completeness.emplace_back(
        t, report.pixels == 0 ? 0.0
                              : static_cast<double>(hits) / report.pixels);
  }
  return report;
}

std::vector<double> ResidualErrors(const DepthEstimate& estimate,
                                   const Raster& gt,
                                   const Grid<std::uint8_t>* mask) {
  CheckShapes(estimate.depth, gt, mask);
  std::vector<double> errors;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!HasTruth(gt, mask, x, y)) continue;
      if (!estimate.frames.valid.at(x, y) ||
          !std::isfinite(estimate.depth.at(x, y))) {
        errors.push_back(kInf);
        continue;
      }
      const auto truth =
          DepthToResidual(estimate.frames.frames.at(x, y), gt.at(x, y));
      errors.push_back(truth.ok()
                           ? std::abs(estimate.residual.at(x, y) - truth.value)
                           : kInf);
    }
  }
  return errors;
}

EvalReport EvaluateEstimate(const DepthEstimate& estimate, const Raster& gt,
                            const Grid<std::uint8_t>* mask) {
  EvalReport report = EvaluateDepth(estimate.depth, gt, mask);
  std::vector<double> errors = ResidualErrors(estimate, gt, mask);
  std::erase_if(errors, [](double e) { return !std::isfinite(e); });
  for (double q : report.quantile_levels) {
    report.residual_error_quantiles.push_back(Quantile(errors, q));
  }
  return report;
}

PlaneFit FitPlane(const std::vector<Eigen::Vector3d>& points) {
  DELS_CHECK(points.size() >= 3, InvalidConfig,
             "plane fit needs at least three points");
  PlaneFit fit;
  for (const Eigen::Vector3d& p : points) fit.centroid += p;
  fit.centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const Eigen::Vector3d& p : points) {
    const Eigen::Vector3d q = p - fit.centroid;
    scatter += q * q.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(scatter);
  fit.normal = solver.eigenvectors().col(0);
  double sum = 0.0;
  for (const Eigen::Vector3d& p : points) {
    const double dist = fit.normal.dot(p - fit.centroid);
    sum += dist * dist;
  }
  fit.rms = std::sqrt(sum / points.size());
  return fit;
}

}  // namespace dels
