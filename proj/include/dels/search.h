#pragma once

#include <array>
#include <cstdint>

#include "dels/geometry.h"
#include "dels/matcher.h"
#include "dels/partition.h"
#include "dels/raster.h"

namespace dels {

struct View {
  Raster image;  // single-channel intensity in [0, 1]
  Intrinsics intrinsics;
  CameraPose pose;
};

// A view with its matching-feature pyramid built once.
struct PreparedView {
  Intrinsics intrinsics;
  CameraPose pose;
  FeaturePyramid pyramid;

  static PreparedView From(const View& view);
  int width(int level = 0) const { return pyramid.features[level].width(); }
  int height(int level = 0) const { return pyramid.features[level].height(); }
};

// Epipolar frames for every pixel of one level; `valid` is 0 where the
// geometry is degenerate or the initial depth lies behind the source camera.
struct FrameMap {
  Grid<EpipolarFrame> frames;
  Grid<std::uint8_t> valid;
};

FrameMap BuildFrameMap(int width, int height, const RelativePose& pose,
                       const Intrinsics& intr_ref, const Intrinsics& intr_src,
                       double init_depth, int threads = 1);

// Per-pixel search bookkeeping for one level.
struct SearchState {
  Grid<double> residual;         // level-local pixels
  Grid<double> width;            // width used by the next iteration
  Grid<double> partition_width;  // width of the last selected partition
  Grid<std::uint8_t> active;
  Grid<std::uint8_t> unestimable;
  Grid<double> entropy_acc;
  Grid<double> last_entropy;
  Grid<int> iterations_done;
  Grid<int> last_partition;

  SearchState() = default;
  SearchState(int width, int height, double initial_width);

  int width_px() const { return residual.width(); }
  int height_px() const { return residual.height(); }
};

// Outcome of selecting `partition` at one pixel.
struct SelectionUpdate {
  double residual = 0.0;
  double width = 0.0;
  double partition_width = 0.0;
  bool stop = false;
};

// Residual moves to the partition's representative point; the width follows
// UpdateWidth (or stays put without the dynamic update); the pixel stops once
// an inner partition is chosen at the level's minimum width.
SelectionUpdate ApplySelection(double residual, double width, int partition,
                               double eps, int k, bool dynamic_width);

struct IterationInputs {
  const ClassifierContext& context;
  const FrameMap& frames;
  const PartitionClassifier& classifier;
  double eps = 0.5;
  int k = 12;
  bool dynamic_width = true;
  int threads = 1;
};

// One classification step for every active pixel.
void DelsIteration(const IterationInputs& inputs, SearchState* state);

struct LevelResult {
  SearchState state;
  Raster mean_entropy;  // accumulated entropy divided by the iteration count
};

// Runs config.iters[level] iterations starting from `initial`. Pixels that
// stop early contribute their last iteration's entropy for each skipped one.
LevelResult RunLevel(int level, SearchState initial,
                     const ClassifierContext& context, const FrameMap& frames,
                     const PartitionConfig& config,
                     const PartitionClassifier& classifier, int threads = 1);

struct DepthEstimate {
  Raster depth;  // NaN where no depth inside [min, max] was found
  Raster confidence_raw;  // level-combined entropy, before the outer override
  Raster delta_depth;     // depth span of the final partition, +inf if none
  Grid<std::uint8_t> occluded;
  Grid<int> last_partition;
  Grid<double> residual;  // full-resolution epipolar residual
  Grid<double> partition_width;
  std::array<Raster, kPyramidLevels> level_entropy;
  FrameMap frames;  // full-resolution frames
};

struct DelsOptions {
  int threads = 1;
};

// Coarse-to-fine search for one reference/source pair, starting from the
// constant depth (min + max) / 2. Throws InvalidConfig on malformed input.
DepthEstimate RunDels(const PreparedView& reference,
                      const PreparedView& source, double min_depth,
                      double max_depth, const PartitionConfig& config,
                      const PartitionClassifier& classifier,
                      const DelsOptions& options = {});

}  // namespace dels
