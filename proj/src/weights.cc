#include "dels/weights.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dels/common.h"

namespace dels {
namespace {

constexpr char kMagic[] = "DELSW1";
constexpr std::size_t kMagicSize = 6;

class LittleEndianWriter {
 public:
  explicit LittleEndianWriter(std::ostream& out) : out_(out) {}

  void U32(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
      v = __builtin_bswap32(v);
    }
    out_.write(reinterpret_cast<const char*>(&v), 4);
  }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void F32s(const std::vector<float>& values) {
    for (float v : values) F32(v);
  }

 private:
  std::ostream& out_;
};

class LittleEndianReader {
 public:
  LittleEndianReader(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  std::uint32_t U32() {
    std::uint32_t v = 0;
    in_.read(reinterpret_cast<char*>(&v), 4);
    if (!in_) throw IoError("truncated file: " + name_);
    if constexpr (std::endian::native == std::endian::big) {
      v = __builtin_bswap32(v);
    }
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  std::vector<float> F32s(std::size_t count) {
    std::vector<float> values(count);
    for (float& v : values) v = F32();
    return values;
  }

 private:
  std::istream& in_;
  std::string name_;
};

bool AllFinite(const std::vector<float>& values) {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Guards against absurd headers before allocating.
constexpr std::uint32_t kMaxDim = 1u << 20;

}  // namespace

void LearnedClassifierWeights::Check() const {
  DELS_CHECK(!layers.empty(), WeightsMismatch, "network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& layer = layers[i];
    DELS_CHECK(layer.rows > 0 && layer.cols > 0, WeightsMismatch,
               "layer " + std::to_string(i) + " has an empty shape");
    DELS_CHECK(layer.weights.size() ==
                       static_cast<std::size_t>(layer.rows) * layer.cols &&
                   layer.bias.size() == static_cast<std::size_t>(layer.rows),
               WeightsMismatch,
               "layer " + std::to_string(i) + " arrays disagree with shape");
    if (i > 0) {
      DELS_CHECK(layer.cols == layers[i - 1].rows, WeightsMismatch,
                 "layer " + std::to_string(i) +
                     " input does not match previous output");
    }
    DELS_CHECK(AllFinite(layer.weights) && AllFinite(layer.bias),
               WeightsMismatch,
               "layer " + std::to_string(i) + " has nonfinite coefficients");
  }
  const auto dim = static_cast<std::size_t>(input_dim());
  DELS_CHECK(input_mean.size() == dim && input_std.size() == dim,
             WeightsMismatch, "input normalization size mismatch");
  DELS_CHECK(AllFinite(input_mean) && AllFinite(input_std), WeightsMismatch,
             "nonfinite input normalization");
  for (float s : input_std) {
    DELS_CHECK(s > 0.0f, WeightsMismatch, "input std must be positive");
  }
}

LearnedClassifierWeights ReadWeights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[kMagicSize];
  in.read(magic, kMagicSize);
  if (!in || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw WeightsMismatch("bad weights magic in " + path.string());
  }
  LittleEndianReader reader(in, path.string());
  const std::uint32_t count = reader.U32();
  DELS_CHECK(count > 0 && count < 1024, WeightsMismatch,
             "implausible layer count");
  LearnedClassifierWeights weights;
  weights.layers.resize(count);
  for (DenseLayer& layer : weights.layers) {
    const std::uint32_t rows = reader.U32();
    const std::uint32_t cols = reader.U32();
    DELS_CHECK(rows > 0 && cols > 0 && rows < kMaxDim && cols < kMaxDim,
               WeightsMismatch, "implausible layer shape");
    layer.rows = static_cast<int>(rows);
    layer.cols = static_cast<int>(cols);
  }
  for (DenseLayer& layer : weights.layers) {
    layer.weights =
        reader.F32s(static_cast<std::size_t>(layer.rows) * layer.cols);
    layer.bias = reader.F32s(layer.rows);
  }
  weights.input_mean = reader.F32s(weights.input_dim());
  weights.input_std = reader.F32s(weights.input_dim());
  weights.Check();
  return weights;
}

void WriteWeights(const std::filesystem::path& path,
                  const LearnedClassifierWeights& weights) {
  weights.Check();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out.write(kMagic, kMagicSize);
  LittleEndianWriter writer(out);
  writer.U32(static_cast<std::uint32_t>(weights.layers.size()));
  for (const DenseLayer& layer : weights.layers) {
    writer.U32(static_cast<std::uint32_t>(layer.rows));
    writer.U32(static_cast<std::uint32_t>(layer.cols));
  }
  for (const DenseLayer& layer : weights.layers) {
    writer.F32s(layer.weights);
    writer.F32s(layer.bias);
  }
  writer.F32s(weights.input_mean);
  writer.F32s(weights.input_std);
  if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path ManifestPathFor(const std::filesystem::path& weights) {
  std::filesystem::path manifest = weights;
  manifest += ".json";
  return manifest;
}

void WriteWeightsManifest(const std::filesystem::path& path,
                          const LearnedClassifierWeights& weights, int k,
                          int channels) {
  nlohmann::json manifest;
  manifest["format"] = "DELSW1";
  manifest["k"] = k;
  manifest["channels"] = channels;
  manifest["input_dim"] = weights.input_dim();
  manifest["output_dim"] = weights.output_dim();
  for (const DenseLayer& layer : weights.layers) {
    manifest["layers"].push_back({{"rows", layer.rows}, {"cols", layer.cols}});
  }
  if (weights.calibration) {
    manifest["confidence_calibration"] = {
        {"scale", weights.calibration->scale},
        {"offset", weights.calibration->offset}};
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << manifest.dump(2) << '\n';
}

void ApplyWeightsManifest(const std::filesystem::path& path,
                          LearnedClassifierWeights* weights) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  try {
    const auto& layers = manifest.at("layers");
    DELS_CHECK(layers.size() == weights->layers.size(), WeightsMismatch,
               "manifest layer count differs from weights");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      DELS_CHECK(layers[i].at("rows").get<int>() == weights->layers[i].rows &&
                     layers[i].at("cols").get<int>() == weights->layers[i].cols,
                 WeightsMismatch,
                 "manifest shape differs for layer " + std::to_string(i));
    }
    if (manifest.contains("confidence_calibration")) {
      const auto& cal = manifest["confidence_calibration"];
      weights->calibration = ConfidenceCalibration{
          cal.at("scale").get<double>(), cal.at("offset").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw WeightsMismatch("manifest " + path.string() + ": " + e.what());
  }
}

std::vector<FixturePair> ReadFixtures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  LittleEndianReader reader(in, path.string());
  const std::uint32_t count = reader.U32();
  const std::uint32_t input_dim = reader.U32();
  const std::uint32_t output_dim = reader.U32();
  DELS_CHECK(count < kMaxDim && input_dim < kMaxDim && output_dim < kMaxDim,
             IoError, "implausible fixture header");
  std::vector<FixturePair> pairs(count);
  for (FixturePair& pair : pairs) {
    pair.input = reader.F32s(input_dim);
    pair.output = reader.F32s(output_dim);
  }
  return pairs;
}

void WriteFixtures(const std::filesystem::path& path,
                   const std::vector<FixturePair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  LittleEndianWriter writer(out);
  const std::size_t input_dim = pairs.empty() ? 0 : pairs.front().input.size();
  const std::size_t output_dim =
      pairs.empty() ? 0 : pairs.front().output.size();
  writer.U32(static_cast<std::uint32_t>(pairs.size()));
  writer.U32(static_cast<std::uint32_t>(input_dim));
  writer.U32(static_cast<std::uint32_t>(output_dim));
  for (const FixturePair& pair : pairs) {
    DELS_CHECK(pair.input.size() == input_dim &&
                   pair.output.size() == output_dim,
               DimensionMismatch, "fixture pairs must share dimensions");
    writer.F32s(pair.input);
    writer.F32s(pair.output);
  }
}

}  // namespace dels
