#pragma once

#include <filesystem>
#include <optional>
#include <vector>

namespace dels {

// y = W x + b with W stored row-major, rows = outputs, cols = inputs.
struct DenseLayer {
  int rows = 0;
  int cols = 0;
  std::vector<float> weights;
  std::vector<float> bias;
};

// Logistic map applied to the normalized entropy score.
struct ConfidenceCalibration {
  double scale = 1.0;
  double offset = 0.0;
};

struct LearnedClassifierWeights {
  std::vector<DenseLayer> layers;
  std::vector<float> input_mean;
  std::vector<float> input_std;
  // Only carried by the JSON manifest.
  std::optional<ConfidenceCalibration> calibration;

  int input_dim() const { return layers.empty() ? 0 : layers.front().cols; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().rows; }

  // Throws WeightsMismatch on broken layer chains, array sizes, nonfinite
  // coefficients or nonpositive input std.
  void Check() const;
};

// Binary layout, little-endian:
//   "DELSW1"
//   u32 layer_count
//   layer_count x (u32 rows, u32 cols)
//   per layer: f32 weights[rows * cols] (row-major), f32 bias[rows]
//   f32 input_mean[cols of layer 0], f32 input_std[cols of layer 0]
LearnedClassifierWeights ReadWeights(const std::filesystem::path& path);
void WriteWeights(const std::filesystem::path& path,
                  const LearnedClassifierWeights& weights);

// JSON sidecar duplicating the shapes, plus the optional confidence
// calibration {"confidence_calibration": {"scale": a, "offset": b}}.
void WriteWeightsManifest(const std::filesystem::path& path,
                          const LearnedClassifierWeights& weights, int k,
                          int channels);
// Reads the manifest, verifies the shapes against `weights` and copies the
// calibration into it. Throws WeightsMismatch on disagreement.
void ApplyWeightsManifest(const std::filesystem::path& path,
                          LearnedClassifierWeights* weights);

// Default manifest location next to a weights file: <path>.json.
std::filesystem::path ManifestPathFor(const std::filesystem::path& weights);

// Cross-implementation fixtures: u32 count, u32 input_dim, u32 output_dim,
// then per pair f32 input[input_dim], f32 output[output_dim].
struct FixturePair {
  std::vector<float> input;
  std::vector<float> output;
};
std::vector<FixturePair> ReadFixtures(const std::filesystem::path& path);
void WriteFixtures(const std::filesystem::path& path,
                   const std::vector<FixturePair>& pairs);

}  // namespace dels
