#include <algorithm>
#include <cmath>

#include "hgf/inference.hpp"

namespace hgf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_inf(double value) {
  return std::isnan(value) ? kInf : value;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& start, const std::vector<double>& step,
    const NelderMeadOptions& options) {
  const std::size_t d = start.size();
  if (d == 0 || step.size() != d) {
    throw ValidationError("optimizer start and step sizes disagree");
  }
  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations
                                 : 400 * static_cast<int>(d);

  std::vector<std::vector<double>> simplex(d + 1, start);
  for (std::size_t i = 0; i < d; ++i) {
    simplex[i + 1][i] += step[i] != 0.0 ? step[i] : 1e-3;
  }
  std::vector<double> values(d + 1);
  for (std::size_t i = 0; i <= d; ++i) values[i] = finite_or_inf(f(simplex[i]));

  std::vector<std::size_t> order(d + 1);
  NelderMeadResult result;
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order[0];
    const std::size_t second_worst = order[d - 1];
    const std::size_t worst = order[d];

    double x_spread = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        x_spread = std::max(x_spread,
                            std::fabs(simplex[i][k] - simplex[best][k]));
      }
    }
    // Both criteria must hold: equal f-values on vertices straddling the
    // minimum would otherwise stop the search one step size away from it.
    const double f_spread = values[worst] - values[best];
    if (x_spread < options.x_tolerance &&
        std::isfinite(f_spread) && f_spread < options.f_tolerance) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k];
    }
    for (std::size_t k = 0; k < d; ++k) centroid[k] /= static_cast<double>(d);

    auto blend = [&](double factor) {
      std::vector<double> point(d);
      for (std::size_t k = 0; k < d; ++k) {
        point[k] = centroid[k] + factor * (centroid[k] - simplex[worst][k]);
      }
      return point;
    };

    const std::vector<double> reflected = blend(1.0);
    const double f_reflected = finite_or_inf(f(reflected));
    if (f_reflected < values[best]) {
      const std::vector<double> expanded = blend(2.0);
      const double f_expanded = finite_or_inf(f(expanded));
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const std::vector<double> contracted = blend(outside ? 0.5 : -0.5);
    const double f_contracted = finite_or_inf(f(contracted));
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < d; ++k) {
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      }
      values[i] = finite_or_inf(f(simplex[i]));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i) {
    if (values[i] < values[best]) best = i;
  }
  result.x = simplex[best];
  result.f = values[best];
  result.iterations = iteration;
  return result;
}

MapEstimate map_fit(const ParameterSpace& space, const SubjectData& data,
                    const Model& model, const MapOptions& options) {
  try {
    Model probe = model;
    space.apply(space.to_natural(space.prior_means()), probe.network,
                probe.response);
  } catch (const InvalidAttributeError&) {
    // Range problems at the prior mean are fine; path problems threw already.
  }

  auto objective = [&](const std::vector<double>& sampled) {
    const double lp = log_posterior(space, sampled, data, model);
    return lp == kNegInf || std::isnan(lp) ? kInf : -lp;
  };

  std::vector<double> step = space.typical_scales();
  for (double& s : step) s *= 0.25;

  const int restarts = std::max(1, options.restarts);
  bool found = false;
  NelderMeadResult best;
  best.f = kInf;
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> start;
    if (r == 0) {
      start = space.prior_means();
    } else {
      Rng rng(Rng::derive(options.seed, 20000 + static_cast<std::uint64_t>(r)));
      start = space.sample_prior(rng);
    }
    NelderMeadResult candidate =
        nelder_mead(objective, start, step, options.nelder_mead);
    if (std::isfinite(candidate.f) && candidate.f < best.f) {
      best = std::move(candidate);
      found = true;
    }
  }
  if (!found) {
    throw OptimizationError(
        "all optimizer starts landed on zero posterior mass");
  }

  MapEstimate estimate;
  estimate.names = space.names();
  estimate.values = space.to_natural(best.x);
  estimate.log_posterior = -best.f;
  return estimate;
}

}  // namespace hgf
