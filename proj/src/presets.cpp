#include "hgf/presets.hpp"

#include <cmath>

#include "hgf/updates.hpp"

namespace hgf {

namespace {

double level_or(const std::vector<double>& values, int level, double fallback) {
  if (values.empty()) return fallback;
  return values[static_cast<std::size_t>(level)];
}

void require_length(const std::vector<double>& values, int expected,
                    const char* field) {
  if (!values.empty() && static_cast<int>(values.size()) != expected) {
    throw ValidationError(std::string("preset field ") + field + " must have " +
                          std::to_string(expected) + " entries or none");
  }
}

}  // namespace

Network preset(const PresetSpec& spec) {
  const bool binary = spec.family == PresetSpec::Family::Binary;
  if (spec.levels < (binary ? 2 : 1)) {
    throw ValidationError("preset needs at least " +
                          std::to_string(binary ? 2 : 1) + " levels");
  }
  require_length(spec.tonic_volatility, spec.levels, "tonic_volatility");
  require_length(spec.initial_mean, spec.levels, "initial_mean");
  require_length(spec.initial_precision, spec.levels, "initial_precision");
  require_length(spec.coupling, spec.levels - 1, "coupling");

  Network net = new_network();
  for (int level = 0; level < spec.levels; ++level) {
    const bool is_binary = binary && level == 0;
    NodeAttributes attrs;
    attrs.mean = level_or(spec.initial_mean, level, is_binary ? 0.5 : 0.0);
    attrs.expected_mean = attrs.mean;
    attrs.precision = level_or(spec.initial_precision, level, 1.0);
    attrs.expected_precision = attrs.precision;
    // The deepest continuous level tracks the input and gets the faster
    // default volatility; everything above it drifts slowly.
    const bool deepest_continuous = level == (binary ? 1 : 0);
    attrs.tonic_volatility =
        level_or(spec.tonic_volatility, level, deepest_continuous ? -3.0 : -6.0);
    if (!(attrs.precision > 0.0) || !std::isfinite(attrs.precision)) {
      throw ValidationError("preset initial precision must be positive");
    }
    net = add_node(std::move(net),
                   is_binary ? NodeKind::Binary : NodeKind::Continuous,
                   std::move(attrs));
  }
  for (int level = 0; level + 1 < spec.levels; ++level) {
    const double strength = level_or(spec.coupling, level, 1.0);
    const bool value_link = binary && level == 0;
    if (!(std::isfinite(strength) && strength >= 0.0)) {
      throw ValidationError("preset coupling strengths must be non-negative");
    }
    if (value_link && strength <= 0.0) {
      throw ValidationError("the binary level's value coupling must be positive");
    }
    const Coupling type = value_link ? Coupling::Value : Coupling::Volatility;
    if (strength > 0.0) {
      net = add_edge(std::move(net), level, level + 1, type, strength);
    } else {
      // Strength 0 freezes the parent while keeping the edge in place;
      // add_edge refuses it, so the strength is written after the fact.
      net = add_edge(std::move(net), level, level + 1, type, 1.0);
      set_attribute(net,
                    "node." + std::to_string(level) + ".volatility_coupling." +
                        std::to_string(net.edges.parents(level, type).size() - 1),
                    0.0);
    }
  }
  net.sequence = derive_update_sequence(net);
  return net;
}

Network preset(const std::string& name) {
  PresetSpec spec;
  if (name == "binary-2") {
    spec.family = PresetSpec::Family::Binary;
    spec.levels = 2;
  } else if (name == "binary-3") {
    spec.family = PresetSpec::Family::Binary;
    spec.levels = 3;
  } else if (name == "continuous-2") {
    spec.family = PresetSpec::Family::Continuous;
    spec.levels = 2;
  } else if (name == "continuous-3") {
    spec.family = PresetSpec::Family::Continuous;
    spec.levels = 3;
  } else {
    throw ValidationError("unknown preset '" + name +
                          "' (expected binary-2, binary-3, continuous-2 or "
                          "continuous-3)");
  }
  return preset(spec);
}

}  // namespace hgf
