#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "dels/harness/evaluation.h"
#include "dels/harness/oracle.h"
#include "dels/harness/scene.h"
#include "test_support.h"

namespace dels {
namespace {

SceneSpec PlaneSpec(int size = 64) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  spec.views = 3;
  spec.ring_radius = 0.3;
  return spec;
}

Eigen::Vector3d BackProject(const View& v, double depth, int x, int y) {
  return v.pose.CameraToWorld(depth * v.intrinsics.InverseK() *
                              Eigen::Vector3d(x, y, 1.0));
}

TEST(RenderScene, PlaneDepthSatisfiesPlaneEquation) {
  const SceneSpec spec = PlaneSpec();
  const Dataset d = RenderScene(spec);
  const PlaneEquation plane = ScenePlane(spec);
  int checked = 0;
  for (int v = 0; v < spec.views; ++v) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double depth = d.gt_depth[v].at(x, y);
        if (!std::isfinite(depth)) continue;
        ++checked;
        const Eigen::Vector3d p = BackProject(d.views[v], depth, x, y);
        EXPECT_NEAR(plane.normal.dot(p) + plane.offset, 0.0, 1e-6);
      }
    }
  }
  EXPECT_EQ(checked, spec.views * spec.width * spec.height);
  EXPECT_GT(d.min_depth, 0.0);
  EXPECT_LT(d.min_depth, d.max_depth);
}

TEST(RenderScene, SpecValidation) {
  SceneSpec spec = PlaneSpec();
  spec.width = 31;
  EXPECT_THROW(spec.Check(), InvalidConfig);
  spec = PlaneSpec();
  spec.views = 1;
  EXPECT_THROW(spec.Check(), InvalidConfig);
  spec = PlaneSpec();
  spec.min_depth = 2.0;
  spec.max_depth = 1.0;
  EXPECT_THROW(spec.Check(), InvalidConfig);
  EXPECT_THROW(ParseSceneKind("torus"), InvalidConfig);
  EXPECT_EQ(ParseSceneKind("sphere"), SceneKind::kSphere);
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(GenerateScene, SameSeedGivesIdenticalFiles) {
  const auto a = testing::TempDir("gen_a");
  const auto b = testing::TempDir("gen_b");
  SceneSpec spec = PlaneSpec(48);
  spec.kind = SceneKind::kBoxes;
  GenerateScene(spec, a);
  GenerateScene(spec, b, 4);
  int files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto rel = std::filesystem::relative(entry.path(), a);
    EXPECT_EQ(Slurp(entry.path()), Slurp(b / rel)) << rel;
  }
  EXPECT_EQ(files, 3 * spec.views + 1);

  const Dataset loaded = LoadDataset(a);
  ASSERT_EQ(loaded.views.size(), 3u);
  const Dataset direct = RenderScene(spec);
  EXPECT_EQ(loaded.min_depth, direct.min_depth);
  for (std::size_t i = 0; i < direct.gt_depth[1].data().size(); ++i) {
    const double g = direct.gt_depth[1].data()[i];
    if (std::isfinite(g)) {
      EXPECT_EQ(loaded.gt_depth[1].data()[i], static_cast<float>(g));
    }
    EXPECT_NEAR(loaded.views[1].image.data()[i],
                direct.views[1].image.data()[i], 0.5 / 65535 + 1e-12);
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  EXPECT_THROW(LoadDataset(a), IoError);
}

TEST(RenderScene, CrossViewPhotoconsistency) {
  const Dataset d = RenderScene(PlaneSpec(96));
  const View& a = d.views[0];
  const View& b = d.views[1];
  const RelativePose rel = RelativePose::Between(a.pose, b.pose);
  const auto visible = VisibilityMask(d.gt_depth[0], a.intrinsics, a.pose,
                                      d.gt_depth[1], b.intrinsics, b.pose);
  int checked = 0;
  int close = 0;
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 96; ++x) {
      if (!visible.at(x, y)) continue;
      const auto q = ProjectToSource({x, y}, d.gt_depth[0].at(x, y), rel,
                                     a.intrinsics, b.intrinsics);
      ASSERT_TRUE(q.ok());
      const auto s = SampleBilinear(b.image, q.value);
      if (s.out_of_bounds) continue;
      ++checked;
      // Interpolation error is bounded by the local variation around the
      // sample.
      const int qx = std::clamp(static_cast<int>(q.value.x()), 1, 94);
      const int qy = std::clamp(static_cast<int>(q.value.y()), 1, 94);
      double spread = 0.0;
      for (int dy = -1; dy <= 2 && qy + dy < 96; ++dy) {
        for (int dx = -1; dx <= 2 && qx + dx < 96; ++dx) {
          spread = std::max(spread, std::abs(b.image.at(qx + dx, qy + dy) -
                                             b.image.at(qx, qy)));
        }
      }
      close += std::abs(s.values[0] - a.image.at(x, y)) <= spread + 1e-3;
    }
  }
  ASSERT_GT(checked, 5000);
  EXPECT_GE(close, 0.99 * checked);
}

SceneSpec NarrowPlaneSpec(double ring_radius) {
  SceneSpec spec = PlaneSpec();
  spec.ring_radius = ring_radius;
  return spec;
}

struct ScanFixture {
  explicit ScanFixture(double ring_radius = 0.3)
      : d(RenderScene(NarrowPlaneSpec(ring_radius))) {}
  Dataset d;
  PreparedView a = PreparedView::From(d.views[0]);
  PreparedView b = PreparedView::From(d.views[1]);
  FrameMap frames =
      BuildFrameMap(64, 64, RelativePose::Between(a.pose, b.pose),
                    a.intrinsics, b.intrinsics,
                    0.5 * (d.min_depth + d.max_depth));
  Grid<std::uint8_t> visible =
      VisibilityMask(d.gt_depth[0], a.intrinsics, a.pose, d.gt_depth[1],
                     b.intrinsics, b.pose);
};

// Fraction of visible pixels whose scan result lies within `tolerance` of the
// analytic residual.
double ScanAccuracy(const ScanFixture& f, double tolerance, int* checked) {
  const Raster& ref = f.a.pyramid.features[0];
  const Raster& src = f.b.pyramid.features[0];
  *checked = 0;
  int within = 0;
  for (int y = 3; y < 61; ++y) {
    for (int x = 3; x < 61; ++x) {
      if (!f.visible.at(x, y) || !f.frames.valid.at(x, y)) continue;
      const EpipolarFrame& frame = f.frames.frames.at(x, y);
      const auto e_gt = DepthToResidual(frame, f.d.gt_depth[0].at(x, y));
      if (!e_gt.ok()) return 0.0;
      const Eigen::Vector2d at = frame.PointAt(e_gt.value);
      if (!InsideRaster(64, 64, at.x() - 3, at.y() - 3) ||
          !InsideRaster(64, 64, at.x() + 3, at.y() + 3)) {
        continue;
      }
      const ScanRange range =
          ResidualScanRange(frame, f.d.min_depth, f.d.max_depth);
      if (!range.ok) return 0.0;
      const ScanResult r =
          BruteForceResidual(ref, src, {x, y}, frame, range.min, range.max);
      ++*checked;
      within += std::abs(r.residual - e_gt.value) <= tolerance;
    }
  }
  return *checked == 0 ? 0.0 : static_cast<double>(within) / *checked;
}

// Patches are compared without warping, so step / 2 accuracy needs a pair
// with little perspective distortion between the views.
TEST(BruteForceResidual, FindsAnalyticResidualWithinHalfStep) {
  const ScanFixture f(0.02);
  int checked = 0;
  const double accuracy = ScanAccuracy(f, 0.125, &checked);
  ASSERT_GT(checked, 1500);
  EXPECT_GE(accuracy, 0.95);
}

TEST(BruteForceResidual, WideBaselineStaysWithinTwoSteps) {
  const ScanFixture f(0.3);
  int checked = 0;
  const double accuracy = ScanAccuracy(f, 0.5, &checked);
  ASSERT_GT(checked, 1500);
  EXPECT_GE(accuracy, 0.95);
}

TEST(BruteForceResidual, ConstantTextureIsNotDiscriminative) {
  ScanFixture f;
  const Raster flat(64, 64, kFeatureChannels, 0.5);
  const ScanResult r = BruteForceResidual(flat, flat, {32, 32},
                                          f.frames.frames.at(32, 32), -20, 20);
  EXPECT_FALSE(r.discriminative);
  EXPECT_THROW(BruteForceResidual(flat, flat, {32, 32},
                                  f.frames.frames.at(32, 32), -1, 1, 0.0),
               InvalidConfig);
}

TEST(BruteForceResidual, NoScanOffsetScoresHigher) {
  ScanFixture f;
  const Raster& ref = f.a.pyramid.features[0];
  const Raster& src = f.b.pyramid.features[0];
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> px(8, 55);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2i pixel(px(rng), px(rng));
    const EpipolarFrame& frame = f.frames.frames.at(pixel.x(), pixel.y());
    const ScanRange range =
        ResidualScanRange(frame, f.d.min_depth, f.d.max_depth);
    const ScanResult best =
        BruteForceResidual(ref, src, pixel, frame, range.min, range.max);
    for (double o = range.min; o <= range.max; o += 0.25) {
      const ScanResult single =
          BruteForceResidual(ref, src, pixel, frame, o, o);
      EXPECT_LE(single.best_score, best.best_score);
    }
  }
}

TEST(EvaluateDepth, Examples) {
  const Raster gt = RenderScene(PlaneSpec()).gt_depth[0];
  const EvalReport exact = EvaluateDepth(gt, gt);
  EXPECT_EQ(exact.pixels, 64u * 64u);
  EXPECT_EQ(exact.rel_error_quantiles[0], 0.0);
  EXPECT_EQ(exact.abs_error_quantiles[1], 0.0);
  EXPECT_EQ(exact.CompletenessAt(0.01), 1.0);

  Raster holes = gt;
  std::mt19937_64 rng(6);
  std::vector<int> order(holes.data().size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t invalid = holes.data().size() / 10;
  for (std::size_t i = 0; i < invalid; ++i) {
    holes.data()[order[i]] = std::nan("");
  }
  const EvalReport partial = EvaluateDepth(holes, gt);
  EXPECT_NEAR(partial.CompletenessAt(0.02),
              1.0 - static_cast<double>(invalid) / holes.data().size(), 1e-12);
  EXPECT_NEAR(partial.valid_fraction(), 0.9, 1e-3);

  EXPECT_THROW(EvaluateDepth(Raster(3, 3), gt), DimensionMismatch);
}

// Shuffled ground truth is far from any acceptance threshold.
TEST(EvaluateDepth, PermutedTruthFails) {
  SceneSpec spec = PlaneSpec();
  spec.kind = SceneKind::kBoxes;
  const Raster gt = RenderScene(spec).gt_depth[0];
  Raster shuffled = gt;
  std::mt19937_64 rng(7);
  std::shuffle(shuffled.data().begin(), shuffled.data().end(), rng);
  const EvalReport r = EvaluateDepth(shuffled, gt);
  EXPECT_GT(r.median_rel_error_all, 0.005);
  EXPECT_LT(r.CompletenessAt(0.02), 0.85);
}

TEST(Quantile, NearestRank) {
  EXPECT_EQ(Quantile({4, 1, 3, 2}, 0.5), 2.0);
  EXPECT_EQ(Quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_EQ(Quantile({5}, 0.0), 5.0);
  EXPECT_TRUE(std::isinf(
      Quantile({1.0, std::numeric_limits<double>::infinity()}, 0.9)));
  EXPECT_TRUE(std::isnan(Quantile({}, 0.5)));
}

TEST(FitPlane, RecoversPlane) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::Vector3d n = Eigen::Vector3d(0.2, -0.3, 1.0).normalized();
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 500; ++i) {
    Eigen::Vector3d p(u(rng), u(rng), 0.0);
    p.z() = (0.5 - n.x() * p.x() - n.y() * p.y()) / n.z();
    pts.push_back(p);
  }
  const PlaneFit fit = FitPlane(pts);
  EXPECT_NEAR(std::abs(fit.normal.dot(n)), 1.0, 1e-12);
  EXPECT_NEAR(fit.rms, 0.0, 1e-12);
  EXPECT_THROW(FitPlane({pts[0], pts[1]}), InvalidConfig);
}

}  // namespace
}  // namespace dels
