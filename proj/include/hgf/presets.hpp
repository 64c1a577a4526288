#pragma once

#include <string>
#include <vector>

#include "hgf/network.hpp"

namespace hgf {

// Declarative builder for the standard chain topologies: a binary or
// continuous observation node, a continuous value parent above it, and
// optionally further volatility parents, each level volatility-coupled to the
// next. Vectors are indexed by level (0 = observation node) and may be left
// empty to take the defaults noted below; a binary level's tonic volatility
// is unused.
struct PresetSpec {
  enum class Family { Binary, Continuous };
  Family family = Family::Binary;
  int levels = 3;
  // Defaults: observation level -3.0 (continuous family), each level above
  // the first continuous one -6.0; binary-family level 1 gets -3.0.
  std::vector<double> tonic_volatility;
  // Defaults 0.0; a binary observation node starts at 0.5.
  std::vector<double> initial_mean;
  // Defaults 1.0; all entries must be positive.
  std::vector<double> initial_precision;
  // Coupling strength between level i and i+1 (value for binary level 0 to
  // level 1, volatility elsewhere), length levels-1. Defaults 1.0. Strength 0
  // is accepted for volatility couplings (a frozen parent); negatives are not.
  std::vector<double> coupling;
};

// Builds the network with a derived update sequence, ready to run.
Network preset(const PresetSpec& spec);

// Named shorthand: "binary-2", "binary-3", "continuous-2", "continuous-3".
Network preset(const std::string& name);

}  // namespace hgf
