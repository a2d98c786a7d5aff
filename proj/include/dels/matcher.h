#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "dels/geometry.h"
#include "dels/raster.h"
#include "dels/weights.h"

namespace dels {

// Probabilities over the k partitions; nonnegative and summing to one.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(std::vector<double> p);

  static ProbabilityVector Uniform(int k);
  static ProbabilityVector OneHot(int k, int index);
  // Numerically stable softmax(logits / temperature).
  static ProbabilityVector Softmax(std::span<const double> logits,
                                   double temperature = 1.0);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }

  // Lowest index wins ties.
  int Argmax() const;
  // Sum of -p log p with 0 log 0 = 0.
  double Entropy() const;

 private:
  std::vector<double> p_;
};

// Inputs shared by every query at one pyramid level.
struct ClassifierContext {
  int level = 0;
  const Raster& ref_features;
  const Raster& src_features;
};

struct PartitionQuery {
  Eigen::Vector2i pixel;
  const EpipolarFrame& frame;
  double residual = 0.0;  // current estimate, level-local pixels
  double width = 1.0;
  int k = 12;
};

// Representative point of every partition: the current estimate
// p0 + d * residual shifted by RelativeResidual(l) along d.
std::vector<Eigen::Vector2d> PartitionSamplePositions(
    const EpipolarFrame& frame, double residual, double width, int k);

class PartitionClassifier {
 public:
  virtual ~PartitionClassifier() = default;
  virtual ProbabilityVector Classify(const ClassifierContext& context,
                                     const PartitionQuery& query) const = 0;
};

// Zero-mean normalized cross correlation between the reference patch at the
// pixel and an axis-aligned source patch at each partition's representative
// point. Channels are centered individually and normalized jointly, so the
// score is invariant to a positive affine change of the source intensity.
// Out-of-bounds partitions score -1, flat patches score 0.
class ZnccClassifier final : public PartitionClassifier {
 public:
  explicit ZnccClassifier(int patch_radius = 3, double temperature = 0.1);

  ProbabilityVector Classify(const ClassifierContext& context,
                             const PartitionQuery& query) const override;

  std::vector<double> Scores(const ClassifierContext& context,
                             const PartitionQuery& query) const;

  int patch_radius() const { return patch_radius_; }
  double temperature() const { return temperature_; }

 private:
  int patch_radius_;
  double temperature_;
};

// Small fully connected network. Input: the reference features at the pixel
// followed by the source features at each of the k representative points
// (zero-filled when out of bounds), i.e. (k + 1) * channels values.
class LearnedClassifier final : public PartitionClassifier {
 public:
  explicit LearnedClassifier(LearnedClassifierWeights weights);

  ProbabilityVector Classify(const ClassifierContext& context,
                             const PartitionQuery& query) const override;

  // Raw (unnormalized) input vector for a query.
  std::vector<double> AssembleInput(const ClassifierContext& context,
                                    const PartitionQuery& query) const;

  // Normalization, hidden layers with leaky ReLU (slope 0.01), softmax.
  ProbabilityVector Forward(std::span<const double> raw_input) const;

  const LearnedClassifierWeights& weights() const { return weights_; }

 private:
  LearnedClassifierWeights weights_;
};

// One-hot on the ground-truth partition label. Test oracle only; the ground
// truth depth is full resolution and coarser levels read it through the
// inverse-depth interpolation at the matching full-resolution position.
class PerfectOracleClassifier final : public PartitionClassifier {
 public:
  explicit PerfectOracleClassifier(Raster gt_depth);

  ProbabilityVector Classify(const ClassifierContext& context,
                             const PartitionQuery& query) const override;

  // Ground-truth depth at a level-local pixel; NaN when unavailable.
  double GroundTruthDepth(int level, const Eigen::Vector2i& pixel) const;

 private:
  Raster gt_depth_;
};

}  // namespace dels
