#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgf/inference.hpp"
#include "hgf/network.hpp"
#include "hgf/response.hpp"

namespace hgf {

// Hand-rolled parser for the TOML subset the model files use: [section]
// headers (dotted), bare or quoted keys, string / number / boolean / flat
// array values, and # comments. Anything beyond that is rejected with the
// line number rather than silently misread.
struct ConfigValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<ConfigValue> array;
};

struct ConfigSection {
  std::string name;  // "" for the root table
  std::vector<std::pair<std::string, ConfigValue>> entries;
  const ConfigValue* find(const std::string& key) const;
};

struct ConfigFile {
  std::vector<ConfigSection> sections;
  const ConfigSection* find(const std::string& name) const;
  // Sections whose names start with prefix + ".", in file order.
  std::vector<const ConfigSection*> children(const std::string& prefix) const;
};

ConfigFile parse_config_text(const std::string& text,
                             const std::string& origin = "<config>");
ConfigFile load_config_file(const std::string& path);

// --- model configuration -----------------------------------------------------
//
// Schema:
//   [network]   preset = "binary-3"            (XOR explicit nodes/edges)
//               nodes = ["binary", "continuous", ...]
//               edges = ["0:1:value:1.0", "1:2:volatility:1.0"]
//               observation_nodes = [0]
//   [parameters]  "node.1.tonic_volatility" = -3.0   (applied after build)
//   [response]  family = "temperature-sigmoid", inverse_temperature = 1.0
//   [sampler]   chains = 4, draws = 1000, warmup = 1000, seed = 1,
//               hdi_mass = 0.94
//   [inference.<name>]  target = "node.1.tonic_volatility",
//               prior = "normal(-3, 2)" | "halfnormal(1)" | "uniform(-6, 0)",
//               transform = "identity" | "log"
//
// Inference sections are optional for presets (a standard volatility +
// temperature space is derived); explicit networks must declare them before
// sampling.

struct ExplicitEdge {
  int child = 0;
  int parent = 0;
  Coupling type = Coupling::Value;
  double strength = 1.0;
};

struct SamplerConfig {
  int chains = 4;
  int draws = 1000;
  int warmup = 1000;
  std::uint64_t seed = 1;
  double hdi_mass = 0.94;
};

struct ModelConfig {
  std::string name = "model";
  std::optional<std::string> preset_name;
  std::vector<NodeKind> nodes;
  std::vector<ExplicitEdge> edges;
  std::vector<int> observation_nodes = {0};
  std::vector<std::pair<std::string, double>> parameters;
  ResponseModel response;
  SamplerConfig sampler;
  std::vector<ParameterSpec> space;
};

ModelConfig parse_model_config(const ConfigFile& file,
                               const std::string& name_hint = "model");
ModelConfig load_model_config(const std::string& path);

// Builds the network (preset or explicit), applies parameter overrides, and
// derives the update sequence.
Network build_network(const ModelConfig& config);
Model build_model(const ModelConfig& config);
// The declared space, or the standard one for presets; ValidationError for
// explicit networks without inference sections.
ParameterSpace build_space(const ModelConfig& config);

}  // namespace hgf
