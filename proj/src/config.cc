#include "dels/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dels/common.h"

namespace dels {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidConfig("'" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

int ParseInt(const std::string& key, const std::string& value) {
  int v = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidConfig("'" + key + "' expects an integer, got '" + value +
                        "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidConfig("'" + key + "' expects true or false, got '" + value +
                      "'");
}

std::vector<int> ParseIntList(const std::string& key, const std::string& value) {
  std::vector<int> list;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) list.push_back(ParseInt(key, item));
  }
  return list;
}

std::string FormatIntList(const std::vector<int>& list) {
  std::string out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(list[i]);
  }
  return out;
}

}  // namespace

const char* ToString(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kZncc:
      return "zncc";
    case ClassifierKind::kLearned:
      return "learned";
    case ClassifierKind::kOracle:
      return "oracle";
  }
  return "unknown";
}

ClassifierKind ParseClassifierKind(const std::string& name) {
  for (ClassifierKind k :
       {ClassifierKind::kZncc, ClassifierKind::kLearned, ClassifierKind::kOracle}) {
    if (name == ToString(k)) return k;
  }
  throw InvalidConfig("unknown classifier '" + name + "'");
}

void RunConfig::Check() const {
  partition.Check();
  fusion.Check();
  DELS_CHECK(patch_radius >= 1, InvalidConfig, "patch_radius must be >= 1");
  DELS_CHECK(temperature > 0.0, InvalidConfig, "temperature must be positive");
  DELS_CHECK(sources >= 1, InvalidConfig, "sources must be >= 1");
  DELS_CHECK(threads >= 1, InvalidConfig, "threads must be >= 1");
  DELS_CHECK(classifier != ClassifierKind::kLearned || !weights.empty(),
             InvalidConfig, "the learned classifier needs a weights path");
  DELS_CHECK(reference >= -1, InvalidConfig, "reference must be >= -1");
  for (int s : source_list) {
    DELS_CHECK(s >= 0, InvalidConfig, "source indices must be >= 0");
  }
}

bool RunConfig::operator==(const RunConfig& other) const {
  return ConfigItems(*this) == ConfigItems(other);
}

std::vector<std::pair<std::string, std::string>> ConfigItems(
    const RunConfig& c) {
  const PartitionConfig& p = c.partition;
  return {
      {"k", std::to_string(p.k)},
      {"delta_init", FormatDouble(p.delta_init)},
      {"eps0", FormatDouble(p.eps[0])},
      {"eps1", FormatDouble(p.eps[1])},
      {"eps2", FormatDouble(p.eps[2])},
      {"iters0", std::to_string(p.iters[0])},
      {"iters1", std::to_string(p.iters[1])},
      {"iters2", std::to_string(p.iters[2])},
      {"dynamic_width", p.dynamic_width ? "true" : "false"},
      {"classifier", ToString(c.classifier)},
      {"patch_radius", std::to_string(c.patch_radius)},
      {"temperature", FormatDouble(c.temperature)},
      {"weights", c.weights},
      {"sources", std::to_string(c.sources)},
      {"source_list", FormatIntList(c.source_list)},
      {"omega", FormatDouble(c.fusion.omega)},
      {"eta", FormatDouble(c.fusion.eta)},
      {"beta", FormatDouble(c.fusion.beta)},
      {"min_consistent", std::to_string(c.fusion.min_consistent)},
      {"consist_rel", FormatDouble(c.fusion.consist_rel)},
      {"cloud_margin", std::to_string(c.fusion.cloud_margin)},
      {"fusion", ToString(c.fusion_mode)},
      {"threads", std::to_string(c.threads)},
      {"dataset", c.dataset},
      {"out", c.out},
      {"reference", std::to_string(c.reference)},
  };
}

void SetConfigValue(RunConfig* c, const std::string& key,
                    const std::string& raw) {
  const std::string value = Trim(raw);
  PartitionConfig& p = c->partition;
  if (key == "k") {
    p.k = ParseInt(key, value);
  } else if (key == "delta_init") {
    p.delta_init = ParseDouble(key, value);
  } else if (key == "eps0" || key == "eps1" || key == "eps2") {
    p.eps[key.back() - '0'] = ParseDouble(key, value);
  } else if (key == "iters0" || key == "iters1" || key == "iters2") {
    p.iters[key.back() - '0'] = ParseInt(key, value);
  } else if (key == "dynamic_width") {
    p.dynamic_width = ParseBool(key, value);
  } else if (key == "classifier") {
    c->classifier = ParseClassifierKind(value);
  } else if (key == "patch_radius") {
    c->patch_radius = ParseInt(key, value);
  } else if (key == "temperature") {
    c->temperature = ParseDouble(key, value);
  } else if (key == "weights") {
    c->weights = value;
  } else if (key == "sources") {
    c->sources = ParseInt(key, value);
  } else if (key == "source_list") {
    c->source_list = ParseIntList(key, value);
  } else if (key == "omega") {
    c->fusion.omega = ParseDouble(key, value);
  } else if (key == "eta") {
    c->fusion.eta = ParseDouble(key, value);
  } else if (key == "beta") {
    c->fusion.beta = ParseDouble(key, value);
  } else if (key == "min_consistent") {
    c->fusion.min_consistent = ParseInt(key, value);
  } else if (key == "consist_rel") {
    c->fusion.consist_rel = ParseDouble(key, value);
  } else if (key == "cloud_margin") {
    c->fusion.cloud_margin = ParseInt(key, value);
  } else if (key == "fusion") {
    c->fusion_mode = ParseFusionMode(value);
  } else if (key == "threads") {
    c->threads = ParseInt(key, value);
  } else if (key == "dataset") {
    c->dataset = value;
  } else if (key == "out") {
    c->out = value;
  } else if (key == "reference") {
    c->reference = ParseInt(key, value);
  } else {
    throw InvalidConfig("unknown config key '" + key + "'");
  }
}

RunConfig ParseConfig(const std::string& text, RunConfig base) {
  std::stringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("config line " + std::to_string(number) +
                          ": expected key = value");
    }
    SetConfigValue(&base, Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig LoadConfig(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str(), std::move(base));
}

std::string DumpConfig(const RunConfig& config) {
  std::string out;
  for (const auto& [key, value] : ConfigItems(config)) {
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace dels
