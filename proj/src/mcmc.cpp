#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "hgf/inference.hpp"

namespace hgf {

namespace {

constexpr int kAdaptWindow = 50;

// Multiplicative scale tuning toward a 20-40% acceptance band; applied per
// adaptation window during warmup only.
double tuned_scale(double scale, double rate) {
  if (rate < 0.02) return scale * 0.3;
  if (rate < 0.10) return scale * 0.6;
  if (rate < 0.20) return scale * 0.85;
  if (rate > 0.90) return scale * 4.0;
  if (rate > 0.60) return scale * 2.0;
  if (rate > 0.40) return scale * 1.3;
  return scale;
}

double safe_density(const LogDensity& target, const std::vector<double>& x) {
  const double value = target(x);
  return std::isnan(value) ? kNegInf : value;
}

// Runs fn(chain) on up to `workers` threads; rethrows the first failure.
void run_chains(int chains, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0 || workers > chains) workers = chains;
  if (workers <= 1) {
    for (int c = 0; c < chains; ++c) fn(c);
    return;
  }
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(chains));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int c = w; c < chains; c += workers) {
        try {
          fn(c);
        } catch (...) {
          failures[static_cast<std::size_t>(c)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

}  // namespace

PosteriorSamples sample_density(const LogDensity& target,
                                const std::vector<std::string>& names,
                                const std::vector<std::vector<double>>& inits,
                                const std::vector<double>& scales,
                                const SamplerOptions& options) {
  const int chains = options.chains;
  if (chains < 1) throw SamplerError("need at least one chain");
  if (options.draws < 1) throw SamplerError("need at least one draw");
  if (options.warmup < 1) throw SamplerError("need a warmup phase");
  if (static_cast<int>(inits.size()) != chains) {
    throw SamplerError("need one starting point per chain");
  }
  const std::size_t dim = scales.size();
  if (dim == 0) throw SamplerError("need at least one dimension");
  for (const auto& init : inits) {
    if (init.size() != dim) {
      throw AlignmentError("starting point does not match the scale vector");
    }
  }
  for (double s : scales) {
    if (!(std::isfinite(s) && s > 0.0)) {
      throw SamplerError("proposal scales must be positive");
    }
  }

  PosteriorSamples result;
  result.names = names;
  result.draws.assign(static_cast<std::size_t>(chains), {});
  result.acceptance.assign(static_cast<std::size_t>(chains), 0.0);

  run_chains(chains, options.workers, [&](int c) {
    Rng rng(Rng::derive(options.seed, static_cast<std::uint64_t>(c)));
    std::vector<double> x = inits[static_cast<std::size_t>(c)];
    double lp = safe_density(target, x);
    if (lp == kNegInf) {
      throw SamplerError("chain " + std::to_string(c) +
                         " starts with zero posterior mass");
    }
    std::vector<double> local = scales;
    double global = 2.38 / std::sqrt(static_cast<double>(dim));
    std::vector<double> proposal(dim);

    // Mid-warmup the per-dimension spread is re-estimated from the second
    // quarter of warmup states; the global factor keeps adapting after.
    const int estimate_begin = options.warmup / 4;
    const int estimate_end = options.warmup / 2;
    std::vector<std::vector<double>> history;
    history.reserve(static_cast<std::size_t>(estimate_end - estimate_begin));

    long warmup_accepts = 0;
    int window_accepts = 0;
    int window_count = 0;
    for (int iter = 0; iter < options.warmup; ++iter) {
      for (std::size_t d = 0; d < dim; ++d) {
        proposal[d] = x[d] + global * local[d] * rng.normal();
      }
      const double lp_new = safe_density(target, proposal);
      if (std::log(rng.uniform() + 1e-300) < lp_new - lp) {
        x = proposal;
        lp = lp_new;
        ++warmup_accepts;
        ++window_accepts;
      }
      ++window_count;
      if (iter >= estimate_begin && iter < estimate_end) history.push_back(x);
      if (iter + 1 == estimate_end && history.size() >= 25) {
        for (std::size_t d = 0; d < dim; ++d) {
          double mean = 0.0;
          for (const auto& h : history) mean += h[d];
          mean /= static_cast<double>(history.size());
          double ss = 0.0;
          for (const auto& h : history) ss += (h[d] - mean) * (h[d] - mean);
          const double sd =
              std::sqrt(ss / static_cast<double>(history.size() - 1));
          if (std::isfinite(sd) && sd > 0.0) local[d] = sd;
        }
      }
      if (window_count == kAdaptWindow) {
        global = tuned_scale(global, static_cast<double>(window_accepts) /
                                         static_cast<double>(window_count));
        window_accepts = 0;
        window_count = 0;
      }
    }
    if (warmup_accepts == 0) {
      throw SamplerError("all proposals rejected during warmup (chain " +
                         std::to_string(c) + ")");
    }

    auto& out = result.draws[static_cast<std::size_t>(c)];
    out.reserve(static_cast<std::size_t>(options.draws));
    long accepts = 0;
    for (int iter = 0; iter < options.draws; ++iter) {
      for (std::size_t d = 0; d < dim; ++d) {
        proposal[d] = x[d] + global * local[d] * rng.normal();
      }
      const double lp_new = safe_density(target, proposal);
      if (std::log(rng.uniform() + 1e-300) < lp_new - lp) {
        x = proposal;
        lp = lp_new;
        ++accepts;
      }
      out.push_back(x);
    }
    result.acceptance[static_cast<std::size_t>(c)] =
        static_cast<double>(accepts) / static_cast<double>(options.draws);
  });
  return result;
}

PosteriorSamples sample(const ParameterSpace& space, const SubjectData& data,
                        const Model& model, const SamplerOptions& options) {
  // Surface structural target problems (bad node index, bad path) eagerly
  // instead of burying them in -inf densities.
  try {
    Model probe = model;
    space.apply(space.to_natural(space.prior_means()), probe.network,
                probe.response);
  } catch (const InvalidAttributeError&) {
    // A prior mean can legitimately fall outside an attribute's range.
  }

  const LogDensity target = [&](const std::vector<double>& sampled) {
    return log_posterior(space, sampled, data, model);
  };

  std::vector<std::vector<double>> inits;
  inits.reserve(static_cast<std::size_t>(options.chains));
  for (int c = 0; c < options.chains; ++c) {
    Rng rng(Rng::derive(options.seed, 10000 + static_cast<std::uint64_t>(c)));
    bool found = false;
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
      std::vector<double> draw = space.sample_prior(rng);
      if (target(draw) != kNegInf) {
        inits.push_back(std::move(draw));
        found = true;
      }
    }
    if (!found) {
      throw SamplerError("no finite starting point found for chain " +
                         std::to_string(c) + " after 100 prior draws");
    }
  }

  PosteriorSamples sampled = sample_density(target, space.names(), inits,
                                            space.typical_scales(), options);
  for (auto& chain : sampled.draws) {
    for (auto& draw : chain) draw = space.to_natural(draw);
  }
  return sampled;
}

// --- multilevel --------------------------------------------------------------

namespace {

struct MultilevelLayout {
  int parameters = 0;
  int subjects = 0;
  // State vector: [mu_0..mu_{P-1}, logsig_0..logsig_{P-1}, z (subject-major)].
  int dim() const { return 2 * parameters + subjects * parameters; }
  int z_offset(int subject) const {
    return 2 * parameters + subject * parameters;
  }
};

double standard_normal_logpdf(double z) {
  return -0.5 * 1.8378770664093454835606594728112 - 0.5 * z * z;
}

}  // namespace

PosteriorSamples multilevel_sample(const ParameterSpace& space,
                                   const std::vector<SubjectData>& dataset,
                                   const Model& model,
                                   const GroupPriors& priors,
                                   const MultilevelOptions& options) {
  const int S = static_cast<int>(dataset.size());
  const int P = space.size();
  if (S < 5) {
    throw ValidationError("the multilevel model needs at least 5 subjects");
  }
  if (options.chains < 2) {
    throw SamplerError("the multilevel sampler needs at least 2 chains");
  }
  if (options.draws < 1 || options.warmup < 1) {
    throw SamplerError("draws and warmup must be positive");
  }

  std::vector<Prior> mean_priors = priors.mean;
  if (mean_priors.empty()) {
    for (const ParameterSpec& spec : space.specs()) {
      mean_priors.push_back(spec.prior);
    }
  }
  if (static_cast<int>(mean_priors.size()) != P) {
    throw ValidationError("group mean priors do not match the parameter count");
  }
  std::vector<double> sigma_scales = priors.sigma_scale;
  if (sigma_scales.empty()) sigma_scales.assign(static_cast<std::size_t>(P), 1.0);
  if (static_cast<int>(sigma_scales.size()) != P) {
    throw ValidationError("group sigma scales do not match the parameter count");
  }
  for (double s : sigma_scales) {
    if (!(std::isfinite(s) && s > 0.0)) {
      throw ValidationError("group sigma scales must be positive");
    }
  }

  const MultilevelLayout layout{P, S};

  // Likelihood of one subject given sampled-scale coordinates.
  auto subject_loglik = [&](int subject,
                            const std::vector<double>& zeta) -> double {
    Model working = model;
    try {
      std::vector<double> natural(static_cast<std::size_t>(P));
      for (int p = 0; p < P; ++p) {
        natural[static_cast<std::size_t>(p)] = to_natural(
            space.specs()[static_cast<std::size_t>(p)].transform,
            zeta[static_cast<std::size_t>(p)]);
      }
      space.apply(natural, working.network, working.response);
      RunResult result =
          run(std::move(working.network),
              dataset[static_cast<std::size_t>(subject)].inputs);
      const double ll =
          log_likelihood(result.trajectory,
                         dataset[static_cast<std::size_t>(subject)].actions,
                         working.response);
      return std::isfinite(ll) ? ll : kNegInf;
    } catch (const NumericalError&) {
      return kNegInf;
    } catch (const DomainError&) {
      return kNegInf;
    } catch (const InvalidAttributeError&) {
      return kNegInf;
    }
  };

  // log p(mu, log sigma): mean priors plus half-normal sigma priors with the
  // log-space Jacobian.
  auto hyper_logprior = [&](const std::vector<double>& state) -> double {
    double total = 0.0;
    for (int p = 0; p < P; ++p) {
      const double lp =
          mean_priors[static_cast<std::size_t>(p)].log_density(
              state[static_cast<std::size_t>(p)]);
      if (lp == kNegInf) return kNegInf;
      total += lp;
      const double log_sigma = state[static_cast<std::size_t>(P + p)];
      const double sigma = std::exp(log_sigma);
      if (!std::isfinite(sigma)) return kNegInf;
      total += Prior::half_normal(sigma_scales[static_cast<std::size_t>(p)])
                   .log_density(sigma) +
               log_sigma;
    }
    return total;
  };

  auto subject_zeta = [&](const std::vector<double>& state, int subject,
                          std::vector<double>& zeta) {
    for (int p = 0; p < P; ++p) {
      const double mu = state[static_cast<std::size_t>(p)];
      const double sigma = std::exp(state[static_cast<std::size_t>(P + p)]);
      zeta[static_cast<std::size_t>(p)] =
          mu + sigma * state[static_cast<std::size_t>(layout.z_offset(subject) + p)];
    }
  };

  // Column names: hyperparameters first, then subject parameters in natural
  // space, subject-major.
  PosteriorSamples result;
  for (int p = 0; p < P; ++p) {
    const ParameterSpec& spec = space.specs()[static_cast<std::size_t>(p)];
    const std::string label =
        spec.transform == Transform::Log ? "log_" + spec.name : spec.name;
    result.names.push_back("mu_" + label);
  }
  for (int p = 0; p < P; ++p) {
    const ParameterSpec& spec = space.specs()[static_cast<std::size_t>(p)];
    const std::string label =
        spec.transform == Transform::Log ? "log_" + spec.name : spec.name;
    result.names.push_back("sigma_" + label);
  }
  for (int i = 0; i < S; ++i) {
    for (int p = 0; p < P; ++p) {
      result.names.push_back(space.specs()[static_cast<std::size_t>(p)].name +
                             "[" + std::to_string(i) + "]");
    }
  }
  result.draws.assign(static_cast<std::size_t>(options.chains), {});
  result.acceptance.assign(static_cast<std::size_t>(options.chains), 0.0);

  run_chains(options.chains, options.workers, [&](int c) {
    Rng rng(Rng::derive(options.seed, static_cast<std::uint64_t>(c)));
    std::vector<double> state(static_cast<std::size_t>(layout.dim()));
    std::vector<double> loglik(static_cast<std::size_t>(S), kNegInf);
    std::vector<double> zeta(static_cast<std::size_t>(P));
    double hyper_lp = kNegInf;

    bool initialized = false;
    for (int attempt = 0; attempt < 100 && !initialized; ++attempt) {
      for (int p = 0; p < P; ++p) {
        state[static_cast<std::size_t>(p)] =
            mean_priors[static_cast<std::size_t>(p)].sample(rng);
        double sigma = std::fabs(
            rng.normal(0.0, sigma_scales[static_cast<std::size_t>(p)]));
        sigma = std::max(sigma, 1e-3);
        state[static_cast<std::size_t>(P + p)] = std::log(sigma);
      }
      for (int i = 0; i < S; ++i) {
        for (int p = 0; p < P; ++p) {
          state[static_cast<std::size_t>(layout.z_offset(i) + p)] = rng.normal();
        }
      }
      hyper_lp = hyper_logprior(state);
      if (hyper_lp == kNegInf) continue;
      bool all_finite = true;
      for (int i = 0; i < S && all_finite; ++i) {
        subject_zeta(state, i, zeta);
        loglik[static_cast<std::size_t>(i)] = subject_loglik(i, zeta);
        all_finite = loglik[static_cast<std::size_t>(i)] != kNegInf;
      }
      initialized = all_finite;
    }
    if (!initialized) {
      throw SamplerError("no finite multilevel starting point (chain " +
                         std::to_string(c) + ")");
    }

    // Block proposal scales: one shared adaptive factor per block.
    std::vector<double> hyper_step(static_cast<std::size_t>(2 * P));
    for (int p = 0; p < P; ++p) {
      hyper_step[static_cast<std::size_t>(p)] =
          mean_priors[static_cast<std::size_t>(p)].typical_scale();
      hyper_step[static_cast<std::size_t>(P + p)] = 0.5;
    }
    const int blocks = 1 + S;
    std::vector<double> block_scale(static_cast<std::size_t>(blocks));
    block_scale[0] = 2.38 / std::sqrt(static_cast<double>(2 * P));
    for (int b = 1; b < blocks; ++b) {
      block_scale[static_cast<std::size_t>(b)] =
          2.38 / std::sqrt(static_cast<double>(P));
    }
    std::vector<int> window_accepts(static_cast<std::size_t>(blocks), 0);
    std::vector<int> window_counts(static_cast<std::size_t>(blocks), 0);

    std::vector<double> proposal = state;
    std::vector<double> proposal_loglik(static_cast<std::size_t>(S));

    auto hyper_update = [&](bool adapt) -> bool {
      proposal = state;
      for (int d = 0; d < 2 * P; ++d) {
        proposal[static_cast<std::size_t>(d)] +=
            block_scale[0] * hyper_step[static_cast<std::size_t>(d)] * rng.normal();
      }
      const double hyper_new = hyper_logprior(proposal);
      double delta = hyper_new - hyper_lp;
      if (hyper_new != kNegInf) {
        for (int i = 0; i < S; ++i) {
          subject_zeta(proposal, i, zeta);
          proposal_loglik[static_cast<std::size_t>(i)] = subject_loglik(i, zeta);
          delta += proposal_loglik[static_cast<std::size_t>(i)] -
                   loglik[static_cast<std::size_t>(i)];
        }
      }
      bool accepted = false;
      if (hyper_new != kNegInf &&
          std::log(rng.uniform() + 1e-300) < delta) {
        state = proposal;
        hyper_lp = hyper_new;
        loglik = proposal_loglik;
        accepted = true;
      }
      if (adapt) {
        window_accepts[0] += accepted ? 1 : 0;
        if (++window_counts[0] == kAdaptWindow) {
          block_scale[0] = tuned_scale(
              block_scale[0], static_cast<double>(window_accepts[0]) /
                                  static_cast<double>(window_counts[0]));
          window_accepts[0] = 0;
          window_counts[0] = 0;
        }
      }
      return accepted;
    };

    auto subject_update = [&](int i, bool adapt) -> bool {
      const int offset = layout.z_offset(i);
      proposal = state;
      double z_lp_old = 0.0;
      double z_lp_new = 0.0;
      for (int p = 0; p < P; ++p) {
        const double old_z = state[static_cast<std::size_t>(offset + p)];
        const double new_z =
            old_z + block_scale[static_cast<std::size_t>(1 + i)] * rng.normal();
        proposal[static_cast<std::size_t>(offset + p)] = new_z;
        z_lp_old += standard_normal_logpdf(old_z);
        z_lp_new += standard_normal_logpdf(new_z);
      }
      subject_zeta(proposal, i, zeta);
      const double ll_new = subject_loglik(i, zeta);
      const double delta =
          z_lp_new - z_lp_old + ll_new - loglik[static_cast<std::size_t>(i)];
      bool accepted = false;
      if (ll_new != kNegInf && std::log(rng.uniform() + 1e-300) < delta) {
        for (int p = 0; p < P; ++p) {
          state[static_cast<std::size_t>(offset + p)] =
              proposal[static_cast<std::size_t>(offset + p)];
        }
        loglik[static_cast<std::size_t>(i)] = ll_new;
        accepted = true;
      }
      if (adapt) {
        auto& wa = window_accepts[static_cast<std::size_t>(1 + i)];
        auto& wc = window_counts[static_cast<std::size_t>(1 + i)];
        wa += accepted ? 1 : 0;
        if (++wc == kAdaptWindow) {
          block_scale[static_cast<std::size_t>(1 + i)] = tuned_scale(
              block_scale[static_cast<std::size_t>(1 + i)],
              static_cast<double>(wa) / static_cast<double>(wc));
          wa = 0;
          wc = 0;
        }
      }
      return accepted;
    };

    long warmup_accepts = 0;
    for (int sweep = 0; sweep < options.warmup; ++sweep) {
      warmup_accepts += hyper_update(true) ? 1 : 0;
      for (int i = 0; i < S; ++i) {
        warmup_accepts += subject_update(i, true) ? 1 : 0;
      }
    }
    if (warmup_accepts == 0) {
      throw SamplerError("all multilevel proposals rejected during warmup (chain " +
                         std::to_string(c) + ")");
    }

    auto& out = result.draws[static_cast<std::size_t>(c)];
    out.reserve(static_cast<std::size_t>(options.draws));
    long accepts = 0;
    long updates = 0;
    for (int sweep = 0; sweep < options.draws; ++sweep) {
      accepts += hyper_update(false) ? 1 : 0;
      ++updates;
      for (int i = 0; i < S; ++i) {
        accepts += subject_update(i, false) ? 1 : 0;
        ++updates;
      }
      std::vector<double> row;
      row.reserve(static_cast<std::size_t>(2 * P + S * P));
      for (int p = 0; p < P; ++p) {
        row.push_back(state[static_cast<std::size_t>(p)]);
      }
      for (int p = 0; p < P; ++p) {
        row.push_back(std::exp(state[static_cast<std::size_t>(P + p)]));
      }
      for (int i = 0; i < S; ++i) {
        subject_zeta(state, i, zeta);
        for (int p = 0; p < P; ++p) {
          row.push_back(to_natural(
              space.specs()[static_cast<std::size_t>(p)].transform,
              zeta[static_cast<std::size_t>(p)]));
        }
      }
      out.push_back(std::move(row));
    }
    result.acceptance[static_cast<std::size_t>(c)] =
        static_cast<double>(accepts) / static_cast<double>(updates);
  });
  return result;
}

}  // namespace hgf
