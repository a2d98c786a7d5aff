#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dels/fusion.h"
#include "dels/partition.h"

namespace dels {

enum class ClassifierKind { kZncc, kLearned, kOracle };
const char* ToString(ClassifierKind kind);
ClassifierKind ParseClassifierKind(const std::string& name);

struct RunConfig {
  PartitionConfig partition;
  FusionParams fusion;
  FusionMode fusion_mode = FusionMode::kGeometryAware;
  ClassifierKind classifier = ClassifierKind::kZncc;
  int patch_radius = 3;
  double temperature = 0.1;
  std::string weights;  // DELSW1 file for the learned classifier
  int sources = 6;
  std::vector<int> source_list;  // overrides nearest-N selection when set
  int threads = 1;
  std::string dataset;
  std::string out = "out";
  int reference = -1;  // -1: every view

  // Throws InvalidConfig.
  void Check() const;

  bool operator==(const RunConfig& other) const;
};

// Every key in dump order with its textual value.
std::vector<std::pair<std::string, std::string>> ConfigItems(
    const RunConfig& config);

// Sets one key from text. Throws InvalidConfig on unknown keys or values
// that do not parse.
void SetConfigValue(RunConfig* config, const std::string& key,
                    const std::string& value);

// Flat "key = value" lines; '#' starts a comment. Unknown keys are errors.
RunConfig ParseConfig(const std::string& text, RunConfig base = {});
RunConfig LoadConfig(const std::filesystem::path& path, RunConfig base = {});
std::string DumpConfig(const RunConfig& config);

}  // namespace dels
