#include "hgf/task.hpp"

#include "hgf/errors.hpp"
#include "hgf/rng.hpp"

namespace hgf {

std::vector<double> switching_task(long trials, std::uint64_t seed, double p,
                                   long block_length) {
  if (trials <= 0) throw ValidationError("trial count must be positive");
  if (block_length <= 0) throw ValidationError("block length must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("block probability must lie strictly inside (0, 1)");
  }
  Rng rng(seed);
  std::vector<double> u;
  u.reserve(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    const bool flipped = (t / block_length) % 2 == 1;
    const double rate = flipped ? 1.0 - p : p;
    u.push_back(static_cast<double>(rng.bernoulli(rate)));
  }
  return u;
}

InputSeries series_from_column(const std::vector<double>& u, int node) {
  InputSeries series;
  series.observations.emplace_back(node, u);
  return series;
}

}  // namespace hgf
