#pragma once

#include <cstdint>
#include <vector>

#include "hgf/network.hpp"

namespace hgf {

// Probabilistic switching task: Bernoulli outcomes whose success probability
// alternates between p and 1-p every block_length trials, starting at p.
std::vector<double> switching_task(long trials, std::uint64_t seed,
                                   double p = 0.8, long block_length = 40);

// Wraps a single binary outcome column as an input series for the given
// observation node.
InputSeries series_from_column(const std::vector<double>& u, int node = 0);

}  // namespace hgf
