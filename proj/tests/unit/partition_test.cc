#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dels/partition.h"
#include "dels/search.h"
#include "trace.h"

namespace dels {
namespace {

TEST(PartitionBorders, Examples) {
  auto b = ComputePartitionBorders(2.0, 12);
  EXPECT_EQ(b.left, -10.0);
  EXPECT_EQ(b.right, 10.0);
  b = ComputePartitionBorders(0.5, 12);
  EXPECT_EQ(b.left, -2.5);
  EXPECT_EQ(b.right, 2.5);
  b = ComputePartitionBorders(1.0, 4);
  EXPECT_EQ(b.left, -1.0);
  EXPECT_EQ(b.right, 1.0);
}

TEST(RelativeResidual, Examples) {
  EXPECT_EQ(RelativeResidual(0, 2.0, 12), -11.0);
  EXPECT_EQ(RelativeResidual(6, 2.0, 12), 1.0);
  EXPECT_EQ(RelativeResidual(11, 2.0, 12), 11.0);
}

TEST(RelativeResidual, InnerMidpointsAndOuterPlacement) {
  for (int k : {4, 8, 12, 16}) {
    for (double width : {0.5, 1.0, 3.0}) {
      const auto b = ComputePartitionBorders(width, k);
      EXPECT_DOUBLE_EQ(RelativeResidual(0, width, k), b.left - width / 2);
      EXPECT_DOUBLE_EQ(RelativeResidual(k - 1, width, k), b.right + width / 2);
      for (int l = 1; l < k - 1; ++l) {
        const double lo = b.left + (l - 1) * width;
        EXPECT_DOUBLE_EQ(RelativeResidual(l, width, k), lo + width / 2);
      }
    }
  }
}

TEST(UpdateWidth, Examples) {
  EXPECT_EQ(UpdateWidth(2.0, 5, 0.5, 12), 1.0);
  EXPECT_EQ(UpdateWidth(0.6, 5, 0.5, 12), 0.5);
  EXPECT_EQ(UpdateWidth(2.0, 0, 0.5, 12), 2.0);
  EXPECT_EQ(UpdateWidth(2.0, 11, 0.5, 12), 2.0);
}

TEST(GroundTruthPartitionLabel, Examples) {
  EXPECT_EQ(GroundTruthPartitionLabel(0.3, 2.0, 12), 6);
  EXPECT_EQ(GroundTruthPartitionLabel(-12.0, 2.0, 12), 0);
  EXPECT_EQ(GroundTruthPartitionLabel(15.0, 2.0, 12), 11);
}

TEST(GroundTruthPartitionLabel, BordersAreExclusiveFromBelow) {
  // A value on a border belongs to the partition left of it.
  EXPECT_EQ(GroundTruthPartitionLabel(0.0, 2.0, 12), 5);
  EXPECT_EQ(GroundTruthPartitionLabel(-10.0, 2.0, 12), 0);
  EXPECT_EQ(GroundTruthPartitionLabel(10.0, 2.0, 12), 10);
  EXPECT_EQ(GroundTruthPartitionLabel(10.0 + 1e-12, 2.0, 12), 11);
}

TEST(GroundTruthPartitionLabel, SelectsTheContainingPartition) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> e(-30.0, 30.0);
  for (int i = 0; i < 5000; ++i) {
    const double width = 2.0;
    const double value = e(rng);
    const int label = GroundTruthPartitionLabel(value, width, 12);
    const double center = RelativeResidual(label, width, 12);
    if (!IsOuterPartition(label, 12)) {
      EXPECT_LE(std::abs(value - center), width / 2 + 1e-12);
    } else if (label == 0) {
      EXPECT_LE(value, -10.0);
    } else {
      EXPECT_GT(value, 10.0);
    }
  }
}

TEST(PartitionConfig, Validation) {
  PartitionConfig config;
  EXPECT_NO_THROW(config.Check());
  config.k = 7;
  EXPECT_THROW(config.Check(), InvalidConfig);
  config = {};
  config.k = 2;
  EXPECT_THROW(config.Check(), InvalidConfig);
  config = {};
  config.eps[1] = 0.0;
  EXPECT_THROW(config.Check(), InvalidConfig);
  config = {};
  config.iters[2] = 0;
  EXPECT_THROW(config.Check(), InvalidConfig);
  config = {};
  config.delta_init = 1.0;  // below eps2 = 2
  EXPECT_THROW(config.Check(), InvalidConfig);
}

TEST(ApplySelection, StopsOnInnerAtMinimumWidth) {
  EXPECT_FALSE(ApplySelection(0, 1.0, 5, 0.5, 12, true).stop);
  EXPECT_TRUE(ApplySelection(0, 0.5, 5, 0.5, 12, true).stop);
  EXPECT_FALSE(ApplySelection(0, 0.5, 0, 0.5, 12, true).stop);
  const auto u = ApplySelection(3.0, 2.0, 6, 0.5, 12, true);
  EXPECT_EQ(u.residual, 4.0);
  EXPECT_EQ(u.width, 1.0);
  EXPECT_EQ(u.partition_width, 2.0);
  EXPECT_EQ(ApplySelection(3.0, 2.0, 6, 0.5, 12, false).width, 2.0);
}

// One oracle iteration at width 2: the error shrinks to at most 1.5 times the
// new width.
TEST(OracleIteration, ErrorBoundedByNewWidth) {
  for (double e = -10.0; e <= 10.0; e += 0.01) {
    const int label = GroundTruthPartitionLabel(e, 2.0, 12);
    const auto u = ApplySelection(0.0, 2.0, label, 0.5, 12, true);
    EXPECT_LE(std::abs(u.residual - e), 1.5 * u.width + 1e-12) << e;
  }
}

// The literal form ("an inner label reduces the error") fails near zero:
// e = 0.1 selects the partition (0, 2] whose midpoint is 0.9 away. What holds
// is that an inner step leaves at most half the old width of error.
TEST(OracleIteration, InnerStepLeavesHalfWidthError) {
  const int label = GroundTruthPartitionLabel(0.1, 2.0, 12);
  EXPECT_FALSE(IsOuterPartition(label, 12));
  EXPECT_GT(std::abs(RelativeResidual(label, 2.0, 12) - 0.1), 0.1);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double width = 0.5 + 7.5 * unit(rng);
    const double residual = 40.0 * (unit(rng) - 0.5);
    const double bound = ComputePartitionBorders(width, 12).right + width;
    const double e_gt = residual + 2.0 * bound * (unit(rng) - 0.5);
    const int label = GroundTruthPartitionLabel(e_gt - residual, width, 12);
    if (IsOuterPartition(label, 12)) continue;
    const double after = residual + RelativeResidual(label, width, 12);
    EXPECT_LE(std::abs(after - e_gt), width / 2 + 1e-9);
  }
}

TEST(OracleTrace, InnerOverlapAfterOuterStep) {
  const int k = 12;
  const auto trace = testing::SimulateOracleTrace(57.3, 1.5, 0.5, k, 100);
  int outer_steps = 0;
  for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    if (s.label != k - 1) continue;
    ++outer_steps;
    const auto& next = trace.steps[i + 1];
    const auto prev = ComputePartitionBorders(s.width, k);
    const auto now = ComputePartitionBorders(next.width, k);
    const double prev_right = s.residual + prev.right;
    const double next_left = next.residual + now.left;
    EXPECT_NEAR(prev_right - next_left, (k - 2) / 2.0 * s.width - s.width / 2,
                1e-9);
  }
  EXPECT_GT(outer_steps, 3);
}

TEST(OracleTrace, WidthNeverGrowsNorDropsBelowEps) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> e(-200.0, 200.0);
  std::uniform_real_distribution<double> w(0.5, 8.0);
  for (int i = 0; i < 2000; ++i) {
    const auto trace = testing::SimulateOracleTrace(e(rng), w(rng), 0.5, 12, 400);
    for (std::size_t j = 1; j < trace.steps.size(); ++j) {
      EXPECT_LE(trace.steps[j].width, trace.steps[j - 1].width);
      EXPECT_GE(trace.steps[j].width, 0.5);
    }
  }
}

TEST(OracleTrace, ZeroResidualStaysInner) {
  const auto trace = testing::SimulateOracleTrace(0.0, 4.0, 0.5, 12, 50);
  ASSERT_TRUE(trace.stopped);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    EXPECT_TRUE(trace.steps[i].label == 5 || trace.steps[i].label == 6);
    if (i > 0) {
      EXPECT_LT(trace.steps[i].width, trace.steps[i - 1].width);
    }
  }
  EXPECT_EQ(trace.steps.back().width, 0.5);
  EXPECT_LE(std::abs(trace.residual), 0.25);
}

TEST(OracleTrace, ConvergesWithinOuterStepBound) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> e(-200.0, 200.0);
  std::uniform_real_distribution<double> w(0.5, 8.0);
  for (int i = 0; i < 5000; ++i) {
    const double e_gt = e(rng);
    const double width = w(rng);
    const int bound = testing::OuterStepReachBound(e_gt, width, 0.5, 12);
    const auto trace = testing::SimulateOracleTrace(e_gt, width, 0.5, 12, bound);
    ASSERT_TRUE(trace.stopped) << e_gt << " " << width;
    EXPECT_LE(std::abs(trace.residual - e_gt), 0.25 + 1e-9);
  }
}

}  // namespace
}  // namespace dels
