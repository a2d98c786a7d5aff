#include "dels/matcher.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dels/common.h"
#include "dels/partition.h"

namespace dels {

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {}

ProbabilityVector ProbabilityVector::Uniform(int k) {
  return ProbabilityVector(std::vector<double>(k, 1.0 / k));
}

ProbabilityVector ProbabilityVector::OneHot(int k, int index) {
  std::vector<double> p(k, 0.0);
  p[index] = 1.0;
  return ProbabilityVector(std::move(p));
}

ProbabilityVector ProbabilityVector::Softmax(std::span<const double> logits,
                                             double temperature) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - max_logit) / temperature);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return ProbabilityVector(std::move(p));
}

int ProbabilityVector::Argmax() const {
  int best = 0;
  for (int i = 1; i < size(); ++i) {
    if (p_[i] > p_[best]) best = i;
  }
  return best;
}

double ProbabilityVector::Entropy() const {
  double h = 0.0;
  for (double v : p_) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

std::vector<Eigen::Vector2d> PartitionSamplePositions(
    const EpipolarFrame& frame, double residual, double width, int k) {
  std::vector<Eigen::Vector2d> positions(k);
  for (int l = 0; l < k; ++l) {
    positions[l] = frame.PointAt(residual + RelativeResidual(l, width, k));
  }
  return positions;
}

ZnccClassifier::ZnccClassifier(int patch_radius, double temperature)
    : patch_radius_(patch_radius), temperature_(temperature) {
  DELS_CHECK(patch_radius >= 1, InvalidConfig, "patch radius must be >= 1");
  DELS_CHECK(temperature > 0.0, InvalidConfig, "temperature must be positive");
}

std::vector<double> ZnccClassifier::Scores(const ClassifierContext& context,
                                           const PartitionQuery& query) const {
  const Raster& ref = context.ref_features;
  const Raster& src = context.src_features;
  const int channels = ref.channels();
  DELS_CHECK(src.channels() == channels, DimensionMismatch,
             "reference and source feature channels differ");
  const int side = 2 * patch_radius_ + 1;
  const int taps = side * side;
  const int min_pairs = (taps + 1) / 2;
  int ref_taps = 0;

  std::vector<double> ref_values(static_cast<std::size_t>(taps) * channels);
  std::vector<char> ref_ok(taps);
  for (int dy = -patch_radius_, t = 0; dy <= patch_radius_; ++dy) {
    for (int dx = -patch_radius_; dx <= patch_radius_; ++dx, ++t) {
      const int x = query.pixel.x() + dx;
      const int y = query.pixel.y() + dy;
      ref_ok[t] = x >= 0 && y >= 0 && x < ref.width() && y < ref.height();
      ref_taps += ref_ok[t];
      for (int c = 0; c < channels; ++c) {
        ref_values[t * channels + c] = ref_ok[t] ? ref.at(x, y, c) : 0.0;
      }
    }
  }

  const auto positions = PartitionSamplePositions(query.frame, query.residual,
                                                  query.width, query.k);
  std::vector<double> scores(query.k, -1.0);
  std::vector<double> src_values(ref_values.size());
  std::vector<char> pair_ok(taps);
  std::vector<double> ref_mean(channels);
  std::vector<double> src_mean(channels);
  for (int l = 0; l < query.k; ++l) {
    const Eigen::Vector2d& s = positions[l];
    if (!InsideRaster(src.width(), src.height(), s.x(), s.y())) {
      continue;
    }
    int pairs = 0;
    std::fill(ref_mean.begin(), ref_mean.end(), 0.0);
    std::fill(src_mean.begin(), src_mean.end(), 0.0);
    for (int dy = -patch_radius_, t = 0; dy <= patch_radius_; ++dy) {
      for (int dx = -patch_radius_; dx <= patch_radius_; ++dx, ++t) {
        pair_ok[t] = ref_ok[t] &&
                     SampleBilinearInto(
                         src, s.x() + dx, s.y() + dy,
                         std::span<double>(src_values).subspan(t * channels,
                                                               channels));
        if (!pair_ok[t]) continue;
        ++pairs;
        for (int c = 0; c < channels; ++c) {
          ref_mean[c] += ref_values[t * channels + c];
          src_mean[c] += src_values[t * channels + c];
        }
      }
    }
    if (pairs < min_pairs) {
      continue;
    }
    for (int c = 0; c < channels; ++c) {
      ref_mean[c] /= pairs;
      src_mean[c] /= pairs;
    }
    double cross = 0.0;
    double ref_var = 0.0;
    double src_var = 0.0;
    for (int t = 0; t < taps; ++t) {
      if (!pair_ok[t]) continue;
      for (int c = 0; c < channels; ++c) {
        const double a = ref_values[t * channels + c] - ref_mean[c];
        const double b = src_values[t * channels + c] - src_mean[c];
        cross += a * b;
        ref_var += a * a;
        src_var += b * b;
      }
    }
    constexpr double kFlat = 1e-14;
    scores[l] = (ref_var <= kFlat || src_var <= kFlat)
                    ? 0.0
                    : cross / std::sqrt(ref_var * src_var);
    // Correlations over a clipped patch are noisier; scale them by coverage
    // so they cannot outrank complete patches by chance.
    scores[l] *= static_cast<double>(pairs) / ref_taps;
  }
  return scores;
}

ProbabilityVector ZnccClassifier::Classify(const ClassifierContext& context,
                                           const PartitionQuery& query) const {
  const std::vector<double> scores = Scores(context, query);
  return ProbabilityVector::Softmax(scores, temperature_);
}

LearnedClassifier::LearnedClassifier(LearnedClassifierWeights weights)
    : weights_(std::move(weights)) {
  weights_.Check();
}

std::vector<double> LearnedClassifier::AssembleInput(
    const ClassifierContext& context, const PartitionQuery& query) const {
  const Raster& ref = context.ref_features;
  const Raster& src = context.src_features;
  const int channels = ref.channels();
  if (weights_.input_dim() != (query.k + 1) * channels ||
      src.channels() != channels) {
    throw WeightsMismatch("network expects " +
                          std::to_string(weights_.input_dim()) +
                          " inputs, query provides " +
                          std::to_string((query.k + 1) * channels));
  }
  std::vector<double> input(static_cast<std::size_t>(query.k + 1) * channels);
  for (int c = 0; c < channels; ++c) {
    input[c] = ref.at(query.pixel.x(), query.pixel.y(), c);
  }
  const auto positions = PartitionSamplePositions(query.frame, query.residual,
                                                  query.width, query.k);
  for (int l = 0; l < query.k; ++l) {
    SampleBilinearInto(src, positions[l].x(), positions[l].y(),
                       std::span<double>(input).subspan((l + 1) * channels,
                                                        channels));
  }
  return input;
}

ProbabilityVector LearnedClassifier::Forward(
    std::span<const double> raw_input) const {
  if (static_cast<int>(raw_input.size()) != weights_.input_dim()) {
    throw WeightsMismatch("input has " + std::to_string(raw_input.size()) +
                          " values, network expects " +
                          std::to_string(weights_.input_dim()));
  }
  std::vector<double> activation(raw_input.size());
  for (std::size_t i = 0; i < raw_input.size(); ++i) {
    activation[i] =
        (raw_input[i] - weights_.input_mean[i]) / weights_.input_std[i];
  }
  std::vector<double> next;
  for (std::size_t li = 0; li < weights_.layers.size(); ++li) {
    const DenseLayer& layer = weights_.layers[li];
    next.assign(layer.rows, 0.0);
    for (int r = 0; r < layer.rows; ++r) {
      double sum = layer.bias[r];
      const float* row =
          layer.weights.data() + static_cast<std::size_t>(r) * layer.cols;
      for (int c = 0; c < layer.cols; ++c) {
        sum += static_cast<double>(row[c]) * activation[c];
      }
      const bool hidden = li + 1 < weights_.layers.size();
      next[r] = hidden && sum < 0.0 ? 0.01 * sum : sum;
    }
    activation.swap(next);
  }
  return ProbabilityVector::Softmax(activation);
}

ProbabilityVector LearnedClassifier::Classify(
    const ClassifierContext& context, const PartitionQuery& query) const {
  if (weights_.output_dim() != query.k) {
    throw WeightsMismatch("network has " +
                          std::to_string(weights_.output_dim()) +
                          " outputs for k = " + std::to_string(query.k));
  }
  return Forward(AssembleInput(context, query));
}

PerfectOracleClassifier::PerfectOracleClassifier(Raster gt_depth)
    : gt_depth_(std::move(gt_depth)) {
  DELS_CHECK(gt_depth_.channels() == 1, DimensionMismatch,
             "ground-truth depth must have one channel");
}

double PerfectOracleClassifier::GroundTruthDepth(
    int level, const Eigen::Vector2i& pixel) const {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  const double scale = std::ldexp(1.0, level);
  const double x = scale * (pixel.x() + 0.5) - 0.5;
  const double y = scale * (pixel.y() + 0.5) - 0.5;
  if (level == 0) {
    const double depth = gt_depth_.at(pixel.x(), pixel.y());
    return depth > 0.0 && std::isfinite(depth) ? depth : kNaN;
  }
  if (!InsideRaster(gt_depth_.width(), gt_depth_.height(), x, y)) {
    return kNaN;
  }
  // Inverse depth is affine in the image for planar surfaces.
  const int x0 = std::min(static_cast<int>(x), gt_depth_.width() - 2);
  const int y0 = std::min(static_cast<int>(y), gt_depth_.height() - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  double inv = 0.0;
  const double weights[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy,
                             fx * fy};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  for (int i = 0; i < 4; ++i) {
    const double depth = gt_depth_.at(xs[i], ys[i]);
    if (!(depth > 0.0) || !std::isfinite(depth)) return kNaN;
    inv += weights[i] / depth;
  }
  return 1.0 / inv;
}

ProbabilityVector PerfectOracleClassifier::Classify(
    const ClassifierContext& context, const PartitionQuery& query) const {
  const double depth = GroundTruthDepth(context.level, query.pixel);
  if (!std::isfinite(depth)) {
    return ProbabilityVector::Uniform(query.k);
  }
  const auto gt = DepthToResidual(query.frame, depth);
  if (!gt.ok()) {
    return ProbabilityVector::Uniform(query.k);
  }
  return ProbabilityVector::OneHot(
      query.k, GroundTruthPartitionLabel(gt.value - query.residual,
                                         query.width, query.k));
}

}  // namespace dels
