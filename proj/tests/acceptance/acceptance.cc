// Acceptance suite: one PASS/FAIL line per criterion. With arguments, only
// the named criteria run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "dels/confidence.h"
#include "dels/fusion.h"
#include "dels/geometry.h"
#include "dels/harness/evaluation.h"
#include "dels/harness/oracle.h"
#include "dels/harness/scene.h"
#include "dels/matcher.h"
#include "dels/partition.h"
#include "dels/pipeline.h"
#include "dels/ply.h"
#include "dels/search.h"
#include "test_support.h"
#include "trace.h"

#ifndef DELS_CLI_PATH
#error "DELS_CLI_PATH must point at the dels executable"
#endif

namespace dels {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  std::ostringstream detail;
  std::vector<std::string> failed;

  void Check(bool ok, const std::string& what) {
    if (!ok && std::find(failed.begin(), failed.end(), what) == failed.end()) {
      failed.push_back(what);
    }
  }
  bool pass() const { return failed.empty(); }
};

Grid<std::uint8_t> UnionVisibility(const Dataset& d, int reference,
                                   const std::vector<int>& sources) {
  const View& ref = d.views[reference];
  Grid<std::uint8_t> mask(ref.image.width(), ref.image.height(), 0);
  for (int s : sources) {
    const auto v = VisibilityMask(d.gt_depth[reference], ref.intrinsics,
                                  ref.pose, d.gt_depth[s],
                                  d.views[s].intrinsics, d.views[s].pose);
    for (std::size_t i = 0; i < mask.values().size(); ++i) {
      mask.values()[i] |= v.values()[i];
    }
  }
  return mask;
}

Grid<std::uint8_t> PairVisibility(const Dataset& d, int reference, int source) {
  return UnionVisibility(d, reference, {source});
}

// ---------------------------------------------------------------------------

void FormulaSuite(Outcome& o) {
  const auto t0 = Clock::now();
  auto borders = [&](double w, int k, double l, double r) {
    const PartitionBorders b = ComputePartitionBorders(w, k);
    o.Check(b.left == l && b.right == r, "borders");
  };
  borders(2, 12, -10, 10);
  borders(0.5, 12, -2.5, 2.5);
  borders(1, 4, -1, 1);

  o.Check(RelativeResidual(0, 2, 12) == -11, "relative_residual l=0");
  o.Check(RelativeResidual(6, 2, 12) == 1, "relative_residual l=6");
  o.Check(RelativeResidual(11, 2, 12) == 11, "relative_residual l=11");

  o.Check(UpdateWidth(2, 5, 0.5, 12) == 1, "update_width inner");
  o.Check(UpdateWidth(0.6, 5, 0.5, 12) == 0.5, "update_width floor");
  o.Check(UpdateWidth(2, 0, 0.5, 12) == 2, "update_width outer");

  o.Check(GroundTruthPartitionLabel(0.3, 2, 12) == 6, "label 0.3");
  o.Check(GroundTruthPartitionLabel(-12, 2, 12) == 0, "label -12");
  o.Check(GroundTruthPartitionLabel(15, 2, 12) == 11, "label 15");

  auto candidates = [](std::vector<double> depth, std::vector<double> conf,
                       std::vector<double> delta) {
    std::vector<FusionCandidate> c(depth.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] = {depth[i], conf[i], delta[i], true};
    }
    return c;
  };
  o.Check(SelectReferenceCandidate(candidates({1, 1, 1}, {0.5, 0.9, 0.3},
                                              {0.05, 0.08, 0.01}),
                                   0.2) == 2,
          "select all pass");
  o.Check(SelectReferenceCandidate(
              candidates({1, 1, 1}, {0.1, 0.9, 0.15}, {0.05, 0.08, 0.01}),
              0.2) == 1,
          "select single member");
  o.Check(SelectReferenceCandidate(candidates({1, 1}, {0.1, 0.05}, {0.1, 0.1}),
                                   0.2) == 0,
          "select fallback");

  const FusionParams params;
  auto fused = FusePixel(candidates({2.0, 2.01, 3.0}, {0.5, 0.9, 0.3},
                                    {0.05, 0.08, 0.01}),
                         params);
  o.Check(fused && fused->depth == 3.0 && fused->confidence == 0.3,
          "fuse n*=2");
  fused = FusePixel(candidates({2.0, 2.01, 3.0}, {0.1, 0.9, 0.15},
                               {0.05, 0.08, 0.01}),
                    params);
  // Exact up to the rounding of the decimal literals.
  o.Check(fused && std::abs(fused->depth - 2.005) <= 1e-15 &&
              std::abs(fused->confidence - 0.5) <= 1e-15,
          "fuse n*=1");
  fused = FusePixel(candidates({1.7}, {0.42}, {0.3}), params);
  o.Check(fused && fused->depth == 1.7 && fused->confidence == 0.42,
          "fuse single");

  const double s = Seconds(t0);
  o.Check(s < 1.0, "runtime");
  o.detail << "examples checked in " << s << " s";
}

void GeometryRoundTrip(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int configurations = 0;
  int attempts = 0;
  double worst = 0.0;
  while (configurations < 1000 && attempts < 100000) {
    ++attempts;
    const auto s = testing::RandomRigidSetup(rng);
    const auto frame = MakeEpipolarFrame(s.pixel, s.pose, s.intr_ref,
                                         s.intr_src, s.init_depth);
    const auto at_depth =
        ProjectToSource(s.pixel, s.depth, s.pose, s.intr_ref, s.intr_src);
    const auto nearer = ProjectToSource(s.pixel, 0.9 * s.depth, s.pose,
                                        s.intr_ref, s.intr_src);
    // Configurations with the point behind the source are not round trips.
    if (!frame.ok() || !at_depth.ok() || !nearer.ok()) continue;
    ++configurations;
    const EpipolarFrame& f = frame.value;
    o.Check((nearer.value - at_depth.value).dot(f.d) > 0.0, "orientation");
    const auto residual = DepthToResidual(f, s.depth);
    if (!residual.ok()) {
      o.Check(false, "residual status");
      continue;
    }
    const auto back = ResidualToDepth(f, residual.value);
    if (!back.ok()) {
      o.Check(false, "depth status");
      continue;
    }
    const double rel = std::abs(back.value - s.depth) / s.depth;
    worst = std::max(worst, rel);
    o.Check(rel <= 1e-6, "round trip");
  }
  o.Check(configurations == 1000, "1000 configurations");
  const double secs = Seconds(t0);
  o.Check(secs < 5.0, "runtime");
  o.detail << configurations << " configurations, worst relative error "
           << worst << ", " << secs << " s";
}

void OracleConvergence(Outcome& o) {
  SceneSpec spec;
  spec.width = 128;
  spec.height = 128;
  spec.views = 4;
  const Dataset d = RenderScene(spec);
  const auto t0 = Clock::now();
  const std::vector<PreparedView> prepared = PrepareViews(d);
  PerfectOracleClassifier oracle(d.gt_depth[0]);
  std::size_t pixels = 0;
  std::size_t within = 0;
  for (int s = 1; s < 4; ++s) {
    const DepthEstimate e = RunDels(prepared[0], prepared[s], d.min_depth,
                                    d.max_depth, PartitionConfig{}, oracle);
    const auto mask = PairVisibility(d, 0, s);
    for (double err : ResidualErrors(e, d.gt_depth[0], &mask)) {
      ++pixels;
      within += err <= 0.75;
    }
  }
  const double secs = Seconds(t0);
  const double fraction = pixels == 0 ? 0.0 : double(within) / pixels;
  o.Check(fraction >= 0.99, "fraction within 0.75 px");
  o.Check(secs < 10.0, "runtime");
  o.detail << within << "/" << pixels << " unoccluded pixels within 0.75 px ("
           << 100.0 * fraction << "%) over 3 pairs, " << secs << " s";
}

void Reachability(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> e_dist(-200.0, 200.0);
  std::uniform_real_distribution<double> w_dist(0.5, 8.0);
  const double eps = 0.5;
  const int k = 12;
  int stated_ok = 0;
  int corrected_ok = 0;
  int worst_excess = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const double e_gt = e_dist(rng);
    const double width = w_dist(rng);
    const testing::OracleTrace t =
        testing::SimulateOracleTrace(e_gt, width, eps, k, 10000);
    const int used = static_cast<int>(t.steps.size());
    const int stated = testing::StatedReachBound(e_gt, width, eps, k);
    stated_ok += t.stopped && used <= stated;
    corrected_ok +=
        t.stopped && used <= testing::OuterStepReachBound(e_gt, width, eps, k);
    worst_excess = std::max(worst_excess, used - stated);
  }
  const double secs = Seconds(t0);
  o.Check(stated_ok == trials, "stated iteration bound");
  o.Check(secs < 5.0, "runtime");
  o.detail << stated_ok << "/" << trials
           << " traces within the stated bound (worst excess " << worst_excess
           << " iterations); " << corrected_ok << "/" << trials
           << " within ceil(|e|/((k-1)/2*delta)) + ceil(log2(delta/eps)) + 1; "
           << secs << " s";
}

void ClassicalEndToEnd(Outcome& o) {
  SceneSpec spec;  // 128 px textured plane, 4 views
  const Dataset d = RenderScene(spec);
  const auto t0 = Clock::now();
  const std::vector<PreparedView> prepared = PrepareViews(d);
  RunConfig config;
  config.sources = 3;
  const ReferenceResult r = EstimateReference(d, prepared, 0, config);
  const auto mask = UnionVisibility(d, 0, r.sources);
  const EvalReport report = EvaluateDepth(r.fused.depth, d.gt_depth[0], &mask);
  const double median = report.median_rel_error_all;
  const double completeness = report.CompletenessAt(0.02);
  o.Check(median <= 0.005, "median relative error");
  o.Check(completeness >= 0.85, "completeness at 2%");

  const double tolerance = std::max(2.0 * config.partition.eps[0], 0.75);
  std::size_t discriminative = 0;
  std::size_t agree = 0;
  std::ostringstream per_source;
  for (std::size_t i = 0; i < r.sources.size(); ++i) {
    const std::size_t pair_start = discriminative;
    const std::size_t agree_start = agree;
    const int s = r.sources[i];
    const DepthEstimate& e = r.estimates[i];
    const auto visible = PairVisibility(d, 0, s);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (!visible.at(x, y) || !e.frames.valid.at(x, y)) continue;
        const EpipolarFrame& frame = e.frames.frames.at(x, y);
        const ScanRange range =
            ResidualScanRange(frame, d.min_depth, d.max_depth);
        if (!range.ok) continue;
        const ScanResult scan = BruteForceResidual(
            prepared[0].pyramid.features[0], prepared[s].pyramid.features[0],
            {x, y}, frame, range.min, range.max);
        if (!scan.discriminative) continue;
        ++discriminative;
        agree += std::abs(e.residual.at(x, y) - scan.residual) <= tolerance;
      }
    }
    per_source << " source " << s << ": " << agree - agree_start << "/"
               << discriminative - pair_start << ";";
  }
  const double agreement =
      discriminative == 0 ? 0.0 : double(agree) / discriminative;
  o.Check(agreement >= 0.90, "brute-force agreement");
  const double secs = Seconds(t0);
  o.Check(secs < 60.0, "runtime");
  o.detail << "median rel " << median << ", completeness@2% " << completeness
           << ", brute-force agreement " << agree << "/" << discriminative
           << " (" << 100.0 * agreement << "%;" << per_source.str() << ") "
           << secs << " s";
}

double MedianError(const Raster& depth, const Dataset& d,
                   const Grid<std::uint8_t>& mask) {
  return EvaluateDepth(depth, d.gt_depth[0], &mask).median_rel_error_all;
}

void AblationOrdering(Outcome& o) {
  SceneSpec spec;
  spec.kind = SceneKind::kSphere;
  spec.views = 4;
  spec.ring_radius = 0.4;
  spec.arc_degrees = 180.0;  // view 0 sees sources at increasing baselines
  const Dataset d = RenderScene(spec);
  const auto t0 = Clock::now();
  const std::vector<PreparedView> prepared = PrepareViews(d);

  RunConfig config;
  config.sources = 3;
  const ReferenceResult dynamic = EstimateReference(d, prepared, 0, config);
  const auto mask = UnionVisibility(d, 0, dynamic.sources);
  std::vector<SourceMaps> maps;
  for (std::size_t i = 0; i < dynamic.estimates.size(); ++i) {
    maps.push_back(ToSourceMaps(dynamic.estimates[i], dynamic.confidences[i]));
  }
  auto fused_error = [&](FusionMode mode) {
    return MedianError(FuseMaps(maps, config.fusion, mode).depth, d, mask);
  };
  RunConfig fixed_config = config;
  fixed_config.partition.dynamic_width = false;
  const ReferenceResult fixed = EstimateReference(d, prepared, 0, fixed_config);

  const double dyn_err = MedianError(dynamic.fused.depth, d, mask);
  const double fixed_err = MedianError(fixed.fused.depth, d, mask);
  const double average = fused_error(FusionMode::kAverage);
  const double masked = fused_error(FusionMode::kOuterMasked);
  const double highest = fused_error(FusionMode::kHighestConfidence);
  const double geometry = fused_error(FusionMode::kGeometryAware);
  o.Check(dyn_err < fixed_err, "(a) dynamic < fixed width");
  o.Check(masked < average, "(b) outer-masked < average");
  o.Check(geometry < highest, "(c) geometry-aware < highest-confidence");
  const double secs = Seconds(t0);
  o.Check(secs < 300.0, "runtime");
  o.detail << "median rel error: (a) dynamic " << dyn_err << " vs fixed "
           << fixed_err << "; (b) outer-masked " << masked << " vs average "
           << average << "; (c) geometry-aware " << geometry
           << " vs highest-confidence " << highest << "; " << secs << " s";
}

void PointCloudPlane(Outcome& o) {
  SceneSpec spec;
  spec.width = 256;
  spec.height = 256;
  spec.views = 4;
  spec.ring_radius = 0.3;
  const Dataset d = RenderScene(spec);
  const auto t0 = Clock::now();
  const std::vector<PreparedView> prepared = PrepareViews(d);
  RunConfig config;
  config.sources = 3;
  std::vector<FusedMaps> fused;
  for (int v = 0; v < spec.views; ++v) {
    fused.push_back(EstimateReference(d, prepared, v, config).fused);
  }
  const std::vector<FusedView> views = MakeFusedViews(d, fused);
  const PointCloud cloud = BuildPointCloud(views, config.fusion);
  o.Check(cloud.points.size() >= 3, "non-empty cloud");
  double rms = std::numeric_limits<double>::infinity();
  if (cloud.points.size() >= 3) {
    std::vector<Eigen::Vector3d> points;
    for (const CloudPoint& p : cloud.points) {
      points.push_back(p.xyz.cast<double>());
    }
    rms = FitPlane(points).rms;
  }
  o.Check(rms <= 1e-3, "plane-fit RMS");

  FusionParams strict = config.fusion;
  strict.beta = 1.0;
  const PointCloud empty = BuildPointCloud(views, strict);
  const fs::path dir = testing::TempDir("acceptance_ply");
  const fs::path ply = dir / "beta1.ply";
  WritePly(ply, empty);
  std::ifstream in(ply, std::ios::binary);
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  const std::string header =
      "ply\nformat binary_little_endian 1.0\nelement vertex 0\n";
  o.Check(empty.points.empty(), "beta=1 cloud empty");
  o.Check(text.rfind(header, 0) == 0 &&
              text.size() >= 11 && text.substr(text.size() - 11) == "end_header\n",
          "beta=1 PLY header");
  o.Check(ReadPly(ply).points.empty(), "beta=1 PLY reloads");
  fs::remove_all(dir);
  o.detail << cloud.points.size() << " points, plane-fit RMS " << rms
           << "; beta=1: " << empty.points.size() << " points, "
           << text.size() << " byte PLY; " << Seconds(t0) << " s";
}

int RunCli(const std::string& args) {
  const std::string command =
      std::string(DELS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> Files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), dir).string()] =
        std::string{std::istreambuf_iterator<char>(in), {}};
  }
  return files;
}

void Determinism(Outcome& o) {
  const auto t0 = Clock::now();
  const fs::path root = testing::TempDir("acceptance_determinism");
  const std::string scene = (root / "scene").string();
  o.Check(RunCli("gen --kind sphere --size 64 --views 4 --seed 3 --out " +
                 scene) == 0,
          "gen");
  std::vector<std::map<std::string, std::string>> runs;
  int run_index = 0;
  for (int threads : {1, 8, 1, 8}) {
    const std::string out = (root / ("run" + std::to_string(run_index++))).string();
    const std::string common =
        " --dataset " + scene + " --sources 2 --threads " +
        std::to_string(threads) + " --out " + out;
    o.Check(RunCli("depth" + common) == 0, "depth");
    o.Check(RunCli("cloud" + common) == 0, "cloud");
    runs.push_back(Files(out));
  }
  std::size_t cloud_files = 0;
  for (const auto& [name, bytes] : runs[0]) {
    cloud_files += name.ends_with(".ply");
  }
  o.Check(runs[0].size() > 4 && cloud_files == 1, "artifacts written");
  o.Check(runs[0] == runs[1], "threads 1 vs 8");
  o.Check(runs[0] == runs[2], "repeat run, 1 thread");
  o.Check(runs[1] == runs[3], "repeat run, 8 threads");
  fs::remove_all(root);
  o.detail << runs[0].size()
           << " depth/confidence/cloud files compared over 4 runs (threads 1, "
              "8, 1, 8); "
           << Seconds(t0) << " s";
}

struct Criterion {
  const char* name;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> all = {
      {"formula_suite", FormulaSuite},
      {"geometry_round_trip", GeometryRoundTrip},
      {"oracle_convergence", OracleConvergence},
      {"reachability", Reachability},
      {"classical_end_to_end", ClassicalEndToEnd},
      {"ablation_ordering", AblationOrdering},
      {"point_cloud", PointCloudPlane},
      {"determinism", Determinism},
  };
  return all;
}

}  // namespace
}  // namespace dels

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  int ran = 0;
  for (const auto& c : dels::Criteria()) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) {
      continue;
    }
    ++ran;
    dels::Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.Check(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass() ? "PASS " : "FAIL ") << c.name << ": "
              << o.detail.str();
    for (const std::string& f : o.failed) std::cout << " [failed: " << f << "]";
    std::cout << std::endl;
    failed += !o.pass();
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
