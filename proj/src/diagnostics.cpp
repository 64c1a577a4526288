#include <algorithm>
#include <cmath>

#include "hgf/inference.hpp"

namespace hgf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SplitChains {
  // subchains[m] has common length n.
  std::vector<std::vector<double>> subchains;
  int n = 0;
};

// Each chain contributes its first and last floor(len/2) iterations; a
// middle element of an odd-length chain is dropped.
SplitChains split(const std::vector<std::vector<double>>& chains) {
  SplitChains out;
  if (chains.size() < 2) {
    throw SamplerError("convergence diagnostics need at least two chains");
  }
  std::size_t len = chains.front().size();
  for (const auto& chain : chains) {
    if (chain.size() != len) {
      throw AlignmentError("chains disagree on length");
    }
  }
  if (len < 4) {
    throw SamplerError("convergence diagnostics need at least 4 iterations");
  }
  const std::size_t half = len / 2;
  out.n = static_cast<int>(half);
  for (const auto& chain : chains) {
    out.subchains.emplace_back(chain.begin(),
                               chain.begin() + static_cast<long>(half));
    out.subchains.emplace_back(chain.end() - static_cast<long>(half),
                               chain.end());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

struct PooledVariance {
  double within = 0.0;
  double between = 0.0;  // n * variance of subchain means
  double var_plus = 0.0;
};

PooledVariance pooled_variance(const SplitChains& sc) {
  std::vector<double> means;
  std::vector<double> vars;
  means.reserve(sc.subchains.size());
  vars.reserve(sc.subchains.size());
  for (const auto& chain : sc.subchains) {
    means.push_back(mean_of(chain));
    vars.push_back(variance_of(chain));
  }
  PooledVariance pv;
  pv.within = mean_of(vars);
  pv.between = static_cast<double>(sc.n) * variance_of(means);
  const double n = static_cast<double>(sc.n);
  pv.var_plus = (n - 1.0) / n * pv.within + pv.between / n;
  return pv;
}

// Acklam's rational approximation of the standard normal quantile, accurate
// to ~1e-9 over (0, 1); plenty for rank normalization.
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (!(p > 0.0 && p < 1.0)) return kNaN;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Average-rank normalization over all subchains jointly (ties share ranks).
void rank_normalize(SplitChains& sc) {
  struct Entry {
    double value;
    int chain;
    int index;
  };
  std::vector<Entry> entries;
  entries.reserve(sc.subchains.size() * static_cast<std::size_t>(sc.n));
  for (std::size_t m = 0; m < sc.subchains.size(); ++m) {
    for (int i = 0; i < sc.n; ++i) {
      entries.push_back(Entry{sc.subchains[m][static_cast<std::size_t>(i)],
                              static_cast<int>(m), i});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });
  const double total = static_cast<double>(entries.size());
  std::size_t start = 0;
  while (start < entries.size()) {
    std::size_t end = start + 1;
    while (end < entries.size() && entries[end].value == entries[start].value) {
      ++end;
    }
    // 1-based average rank for the tied run, Blom-transformed.
    const double rank =
        (static_cast<double>(start + end - 1) / 2.0) + 1.0;
    const double z = inverse_normal_cdf((rank - 0.375) / (total + 0.25));
    for (std::size_t k = start; k < end; ++k) {
      sc.subchains[static_cast<std::size_t>(entries[k].chain)]
                  [static_cast<std::size_t>(entries[k].index)] = z;
    }
    start = end;
  }
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const SplitChains sc = split(chains);
  const PooledVariance pv = pooled_variance(sc);
  if (!(pv.within > 0.0)) {
    // Zero spread everywhere is a converged degenerate case, not a failure.
    return pv.between > 1e-300 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return std::sqrt(pv.var_plus / pv.within);
}

double ess_bulk(const std::vector<std::vector<double>>& chains) {
  SplitChains sc = split(chains);
  rank_normalize(sc);
  const PooledVariance pv = pooled_variance(sc);
  if (!(pv.var_plus > 0.0)) return kNaN;

  const std::size_t m = sc.subchains.size();
  const int n = sc.n;
  std::vector<double> chain_means(m);
  for (std::size_t j = 0; j < m; ++j) chain_means[j] = mean_of(sc.subchains[j]);

  // Biased (1/n) autocovariances per subchain.
  auto autocov = [&](std::size_t j, int lag) {
    const auto& x = sc.subchains[j];
    const double mean = chain_means[j];
    double total = 0.0;
    for (int i = 0; i + lag < n; ++i) {
      total += (x[static_cast<std::size_t>(i)] - mean) *
               (x[static_cast<std::size_t>(i + lag)] - mean);
    }
    return total / static_cast<double>(n);
  };

  auto rho = [&](int lag) {
    double mean_acov = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean_acov += autocov(j, lag);
    mean_acov /= static_cast<double>(m);
    return 1.0 - (pv.within - mean_acov) / pv.var_plus;
  };

  // Geyer initial monotone positive sequence over lag pairs.
  double tau_sum = 0.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (int k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous_pair);
    previous_pair = pair;
    tau_sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * tau_sum, 1.0 / std::log10(
      static_cast<double>(m) * static_cast<double>(n)));
  const double total = static_cast<double>(m) * static_cast<double>(n);
  return std::min(total / tau, total * std::log10(total));
}

std::pair<double, double> hdi(std::vector<double> draws, double mass) {
  if (draws.empty()) throw ValidationError("the interval needs at least one draw");
  if (!(mass > 0.0 && mass <= 1.0)) {
    throw ValidationError("interval mass must lie in (0, 1]");
  }
  std::sort(draws.begin(), draws.end());
  const std::size_t n = draws.size();
  std::size_t include = static_cast<std::size_t>(
      std::ceil(mass * static_cast<double>(n)));
  include = std::clamp<std::size_t>(include, 1, n);
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + include <= n; ++i) {
    const double width = draws[i + include - 1] - draws[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {draws[best], draws[best + include - 1]};
}

const ParameterSummary& SummaryTable::row(const std::string& name) const {
  for (const ParameterSummary& r : rows) {
    if (r.name == name) return r;
  }
  throw ValidationError("no summary row named '" + name + "'");
}

SummaryTable summarize(const PosteriorSamples& samples, double hdi_mass) {
  if (samples.chains() < 2) {
    throw SamplerError("summaries need at least two chains");
  }
  if (!(hdi_mass > 0.0 && hdi_mass <= 1.0)) {
    throw ValidationError("interval mass must lie in (0, 1]");
  }
  SummaryTable table;
  table.hdi_mass = hdi_mass;
  for (int p = 0; p < samples.parameters(); ++p) {
    ParameterSummary row;
    row.name = samples.names[static_cast<std::size_t>(p)];
    const std::vector<double> pooled = samples.pooled(p);
    row.mean = mean_of(pooled);
    row.sd = std::sqrt(variance_of(pooled));
    const auto chains = samples.by_chain(p);
    row.rhat = split_rhat(chains);
    row.ess_bulk = ess_bulk(chains);
    const auto interval = hdi(pooled, hdi_mass);
    row.hdi_low = interval.first;
    row.hdi_high = interval.second;
    row.mcse_mean = row.sd / std::sqrt(row.ess_bulk);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace hgf
