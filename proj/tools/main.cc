#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dels/common.h"
#include "dels/config.h"
#include "dels/harness/evaluation.h"
#include "dels/harness/scene.h"
#include "dels/image_io.h"
#include "dels/pipeline.h"
#include "dels/ply.h"

namespace fs = std::filesystem;
using namespace dels;

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitIo = 3;

std::string ViewName(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return buf;
}

std::string PairName(int reference, int source) {
  return ViewName(reference) + "_s" + ViewName(source);
}

Raster OccludedRaster(const Grid<std::uint8_t>& occluded) {
  Raster r(occluded.width(), occluded.height());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) r.at(x, y) = occluded.at(x, y);
  }
  return r;
}

Grid<std::uint8_t> OccludedGrid(const Raster& r) {
  Grid<std::uint8_t> g(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) g.at(x, y) = r.at(x, y) != 0.0;
  }
  return g;
}

// Run options shared by depth, fuse, cloud and eval: every config key as a
// flag, plus --config and --dump-config.
struct RunOptions {
  std::string config_path;
  bool dump = false;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void Attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat key = value config file");
    app->add_flag("--dump-config", dump, "print the effective config and exit");
    for (const auto& [key, value] : ConfigItems(RunConfig{})) {
      std::string flag = key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      const std::string names =
          key == "reference" ? "--reference,--ref" : "--" + flag;
      options[key] = app->add_option(names, values[key],
                                     "config key " + key + " (default " +
                                         (value.empty() ? "unset" : value) +
                                         ")");
    }
  }

  RunConfig Resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = LoadConfig(config_path, config);
    for (const auto& [key, option] : options) {
      if (option->count() > 0) SetConfigValue(&config, key, values.at(key));
    }
    config.Check();
    return config;
  }
};

std::vector<int> References(const RunConfig& config, const Dataset& dataset) {
  const int n = static_cast<int>(dataset.views.size());
  if (config.reference >= 0) {
    DELS_CHECK(config.reference < n, InvalidConfig,
               "reference index out of range");
    return {config.reference};
  }
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  return all;
}

// Pixels of the reference that at least one of its sources sees.
Grid<std::uint8_t> UnionVisibility(const Dataset& dataset, int reference,
                                   const std::vector<int>& sources) {
  const Raster& gt = dataset.gt_depth[reference];
  Grid<std::uint8_t> mask(gt.width(), gt.height(), 0);
  for (int s : sources) {
    const auto visible = VisibilityMask(
        gt, dataset.views[reference].intrinsics, dataset.views[reference].pose,
        dataset.gt_depth[s], dataset.views[s].intrinsics, dataset.views[s].pose);
    for (std::size_t i = 0; i < mask.values().size(); ++i) {
      mask.values()[i] |= visible.values()[i];
    }
  }
  return mask;
}

void PrintReport(const std::string& title, const EvalReport& report) {
  std::cout << "== " << title << "\n" << report.Format();
}

void EvaluateFused(const Dataset& dataset, int reference,
                   const std::vector<int>& sources, const Raster& depth,
                   double runtime) {
  if (!dataset.has_ground_truth()) return;
  const auto mask = UnionVisibility(dataset, reference, sources);
  EvalReport all = EvaluateDepth(depth, dataset.gt_depth[reference]);
  EvalReport visible =
      EvaluateDepth(depth, dataset.gt_depth[reference], &mask);
  all.runtime_s = visible.runtime_s = runtime;
  PrintReport("view " + ViewName(reference) + " all pixels", all);
  PrintReport("view " + ViewName(reference) + " unoccluded", visible);
}

FusedMaps ReadFused(const fs::path& dir, int reference) {
  const fs::path depth = dir / (ViewName(reference) + ".depth.pfm");
  const fs::path conf = dir / (ViewName(reference) + ".conf.pfm");
  return {ReadPfm(depth), ReadPfm(conf)};
}

int RunGen(const SceneSpec& spec, const std::string& out, int threads) {
  GenerateScene(spec, out, threads);
  std::cout << "wrote " << spec.views << " views to " << out << "\n";
  return 0;
}

int RunDepth(const RunConfig& config) {
  const Dataset dataset = LoadDataset(config.dataset);
  const auto prepared = PrepareViews(dataset);
  fs::create_directories(config.out);
  for (int reference : References(config, dataset)) {
    const auto start = std::chrono::steady_clock::now();
    const ReferenceResult result =
        EstimateReference(dataset, prepared, reference, config);
    const double runtime = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    for (std::size_t i = 0; i < result.sources.size(); ++i) {
      const fs::path base =
          fs::path(config.out) / PairName(reference, result.sources[i]);
      const DepthEstimate& e = result.estimates[i];
      WritePfm(base.string() + ".depth.pfm", e.depth);
      WritePfm(base.string() + ".conf.pfm", result.confidences[i]);
      WritePfm(base.string() + ".delta.pfm", e.delta_depth);
      WritePfm(base.string() + ".occ.pfm", OccludedRaster(e.occluded));
    }
    const fs::path fused = fs::path(config.out) / ViewName(reference);
    WritePfm(fused.string() + ".depth.pfm", result.fused.depth);
    WritePfm(fused.string() + ".conf.pfm", result.fused.confidence);
    std::cout << "view " << ViewName(reference) << ": "
              << result.sources.size() << " sources, " << runtime << " s\n";
    EvaluateFused(dataset, reference, result.sources, result.fused.depth,
                  runtime);
  }
  return 0;
}

int RunFuse(const RunConfig& config, const std::string& in) {
  const Dataset dataset = LoadDataset(config.dataset);
  const fs::path dir = in.empty() ? fs::path(config.out) : fs::path(in);
  fs::create_directories(config.out);
  for (int reference : References(config, dataset)) {
    const auto sources =
        SelectSources(dataset, reference, config.sources, config.source_list);
    std::vector<SourceMaps> maps;
    for (int s : sources) {
      const std::string base = (dir / PairName(reference, s)).string();
      maps.push_back({ReadPfm(base + ".depth.pfm"), ReadPfm(base + ".conf.pfm"),
                      ReadPfm(base + ".delta.pfm"),
                      OccludedGrid(ReadPfm(base + ".occ.pfm"))});
    }
    const FusedMaps fused =
        FuseMaps(maps, config.fusion, config.fusion_mode, config.threads);
    const fs::path out = fs::path(config.out) / ViewName(reference);
    WritePfm(out.string() + ".depth.pfm", fused.depth);
    WritePfm(out.string() + ".conf.pfm", fused.confidence);
    std::cout << "fused view " << ViewName(reference) << " ("
              << ToString(config.fusion_mode) << ")\n";
    EvaluateFused(dataset, reference, sources, fused.depth, 0.0);
  }
  return 0;
}

int RunCloud(const RunConfig& config, const std::string& in) {
  const Dataset dataset = LoadDataset(config.dataset);
  std::vector<FusedMaps> fused;
  std::vector<PreparedView> prepared;
  for (int v = 0; v < static_cast<int>(dataset.views.size()); ++v) {
    if (!in.empty()) {
      fused.push_back(ReadFused(in, v));
      continue;
    }
    if (prepared.empty()) prepared = PrepareViews(dataset);
    fused.push_back(EstimateReference(dataset, prepared, v, config).fused);
  }
  const PointCloud cloud =
      BuildPointCloud(MakeFusedViews(dataset, fused), config.fusion);
  fs::create_directories(config.out);
  const fs::path path = fs::path(config.out) / "cloud.ply";
  WritePly(path, cloud);
  std::cout << "wrote " << cloud.points.size() << " points to "
            << path.string() << "\n";
  return 0;
}

int RunEval(const RunConfig& config, const std::string& in) {
  const Dataset dataset = LoadDataset(config.dataset);
  if (!dataset.has_ground_truth()) {
    throw IoError("dataset " + config.dataset + " has no ground-truth depth");
  }
  const fs::path dir = in.empty() ? fs::path(config.out) : fs::path(in);
  for (int reference : References(config, dataset)) {
    const auto sources =
        SelectSources(dataset, reference, config.sources, config.source_list);
    EvaluateFused(dataset, reference, sources,
                  ReadFused(dir, reference).depth, 0.0);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-to-fine epipolar line search for multi-view stereo"};
  app.require_subcommand(1);

  SceneSpec spec;
  std::string kind;
  std::string texture = ToString(spec.texture);
  std::string gen_out = "scene";
  int gen_threads = 1;
  int size = spec.width;
  std::uint64_t seed = spec.seed;
  CLI::App* gen = app.add_subcommand("gen", "render a synthetic dataset");
  gen->add_option("--kind", kind, "plane, sphere or boxes")->required();
  gen->add_option("--texture", texture, "value-noise or checker");
  gen->add_option("--texture-scale", spec.texture_scale, "texture cell size");
  gen->add_option("--size", size, "image width and height");
  gen->add_option("--views", spec.views, "number of views");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--radius", spec.ring_radius, "camera ring radius");
  gen->add_option("--distance", spec.distance, "camera ring distance");
  gen->add_option("--arc", spec.arc_degrees, "camera arc in degrees");
  gen->add_option("--focal", spec.focal_factor, "focal length / width");
  gen->add_option("--min-depth", spec.min_depth, "depth range minimum");
  gen->add_option("--max-depth", spec.max_depth, "depth range maximum");
  gen->add_option("--out", gen_out, "dataset directory");
  gen->add_option("--threads", gen_threads, "render threads");

  std::string in;
  RunOptions depth_opts, fuse_opts, cloud_opts, eval_opts;
  CLI::App* depth = app.add_subcommand(
      "depth", "estimate per-source and fused depth maps");
  depth_opts.Attach(depth);
  CLI::App* fuse = app.add_subcommand(
      "fuse", "fuse per-source maps written by depth");
  fuse_opts.Attach(fuse);
  fuse->add_option("--in", in, "directory with per-source maps");
  CLI::App* cloud = app.add_subcommand("cloud", "export a point cloud");
  cloud_opts.Attach(cloud);
  cloud->add_option("--in", in,
                    "directory with fused maps (computed when omitted)");
  CLI::App* eval = app.add_subcommand("eval", "evaluate fused maps");
  eval_opts.Attach(eval);
  eval->add_option("--in", in, "directory with fused maps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidConfig;
  }

  try {
    if (gen->parsed()) {
      spec.kind = ParseSceneKind(kind);
      spec.texture = ParseTextureKind(texture);
      spec.width = spec.height = size;
      spec.seed = seed;
      spec.Check();
      return RunGen(spec, gen_out, gen_threads);
    }
    struct Entry {
      CLI::App* app;
      RunOptions* options;
    };
    for (const Entry& entry : {Entry{depth, &depth_opts}, Entry{fuse, &fuse_opts},
                               Entry{cloud, &cloud_opts},
                               Entry{eval, &eval_opts}}) {
      if (!entry.app->parsed()) continue;
      const RunConfig config = entry.options->Resolve();
      if (entry.options->dump) {
        std::cout << DumpConfig(config);
        return 0;
      }
      DELS_CHECK(!config.dataset.empty(), InvalidConfig,
                 "no dataset given (--dataset)");
      if (entry.app == depth) return RunDepth(config);
      if (entry.app == fuse) return RunFuse(config, in);
      if (entry.app == cloud) return RunCloud(config, in);
      return RunEval(config, in);
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
