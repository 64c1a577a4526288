#include "hgf/inference.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <set>
#include <thread>

#include "hgf/task.hpp"

namespace hgf {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kProbFloor = 1e-12;

}  // namespace

// --- priors ------------------------------------------------------------------

Prior Prior::normal(double mean, double sd) {
  if (!(std::isfinite(mean) && std::isfinite(sd) && sd > 0.0)) {
    throw ValidationError("normal priors need a finite mean and positive sd");
  }
  return Prior{Kind::Normal, mean, sd};
}

Prior Prior::half_normal(double scale) {
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw ValidationError("half-normal priors need a positive scale");
  }
  return Prior{Kind::HalfNormal, 0.0, scale};
}

Prior Prior::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ValidationError("uniform priors need finite bounds with lo < hi");
  }
  return Prior{Kind::Uniform, lo, hi};
}

double Prior::log_density(double x) const {
  switch (kind) {
    case Kind::Normal: {
      const double z = (x - a) / b;
      return -0.5 * kLogTwoPi - std::log(b) - 0.5 * z * z;
    }
    case Kind::HalfNormal: {
      if (x < 0.0) return kNegInf;
      // Folding N(0, b) onto the half line doubles the density.
      const double z = x / b;
      return std::log(2.0) - 0.5 * kLogTwoPi - std::log(b) - 0.5 * z * z;
    }
    case Kind::Uniform:
      return (x >= a && x <= b) ? -std::log(b - a) : kNegInf;
  }
  return kNegInf;
}

double Prior::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Normal:
      return rng.normal(a, b);
    case Kind::HalfNormal:
      return std::fabs(rng.normal(0.0, b));
    case Kind::Uniform:
      return rng.uniform(a, b);
  }
  return 0.0;
}

double Prior::typical_scale() const {
  switch (kind) {
    case Kind::Normal:
      return b;
    case Kind::HalfNormal:
      return b * 0.6;  // sd of |N(0, b)|
    case Kind::Uniform:
      return (b - a) * 0.29;  // sd of U(a, b)
  }
  return 1.0;
}

double Prior::mean() const {
  switch (kind) {
    case Kind::Normal:
      return a;
    case Kind::HalfNormal:
      return b * 0.7978845608028654;  // sqrt(2/pi)
    case Kind::Uniform:
      return 0.5 * (a + b);
  }
  return 0.0;
}

std::pair<double, double> Prior::support() const {
  switch (kind) {
    case Kind::Normal:
      return {kNegInf, -kNegInf};
    case Kind::HalfNormal:
      return {0.0, -kNegInf};
    case Kind::Uniform:
      return {a, b};
  }
  return {kNegInf, -kNegInf};
}

// --- transforms --------------------------------------------------------------

double to_natural(Transform t, double sampled) {
  return t == Transform::Log ? std::exp(sampled) : sampled;
}

double to_sampled(Transform t, double natural) {
  if (t == Transform::Identity) return natural;
  if (!(natural > 0.0)) {
    throw DomainError("log-transformed parameters must be positive");
  }
  return std::log(natural);
}

// --- parameter space ---------------------------------------------------------

struct ParameterSpace::Target {
  bool is_response = false;
  std::string path;
};

ParameterSpace::ParameterSpace() = default;
ParameterSpace::ParameterSpace(const ParameterSpace&) = default;
ParameterSpace::ParameterSpace(ParameterSpace&&) noexcept = default;
ParameterSpace& ParameterSpace::operator=(const ParameterSpace&) = default;
ParameterSpace& ParameterSpace::operator=(ParameterSpace&&) noexcept = default;
ParameterSpace::~ParameterSpace() = default;

namespace {

bool is_integer_token(const std::string& token) {
  if (token.empty()) return false;
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size() && value >= 0;
}

// Shape-only validation; node bounds are checked when the path is applied to
// a concrete network.
void validate_target_shape(const std::string& target) {
  if (target == "response.inverse_temperature") return;
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= target.size()) {
    std::size_t dot = target.find('.', start);
    if (dot == std::string::npos) {
      tokens.push_back(target.substr(start));
      break;
    }
    tokens.push_back(target.substr(start, dot - start));
    start = dot + 1;
  }
  if (tokens.size() < 3 || tokens[0] != "node" || !is_integer_token(tokens[1])) {
    throw InvalidAttributeError("bad parameter target '" + target + "'");
  }
  static const std::set<std::string> plain = {
      "mean", "expected_mean", "precision", "expected_precision",
      "tonic_volatility"};
  const std::string& attr = tokens[2];
  if (plain.count(attr)) {
    if (tokens.size() != 3) {
      throw InvalidAttributeError("bad parameter target '" + target + "'");
    }
    return;
  }
  if (attr == "value_coupling" || attr == "volatility_coupling") {
    if (tokens.size() != 4 || !is_integer_token(tokens[3])) {
      throw InvalidAttributeError("bad parameter target '" + target + "'");
    }
    return;
  }
  if (attr == "extra" && tokens.size() >= 4 && !tokens[3].empty()) return;
  throw InvalidAttributeError("bad parameter target '" + target + "'");
}

std::string derived_name(const std::string& target) {
  std::string name = target;
  std::replace(name.begin(), name.end(), '.', '_');
  return name;
}

}  // namespace

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> specs)
    : specs_(std::move(specs)) {
  if (specs_.empty()) {
    throw ValidationError("a parameter space needs at least one parameter");
  }
  std::set<std::string> seen;
  for (ParameterSpec& spec : specs_) {
    validate_target_shape(spec.target);
    if (spec.name.empty()) spec.name = derived_name(spec.target);
    if (!seen.insert(spec.name).second) {
      throw ValidationError("duplicate parameter name '" + spec.name + "'");
    }
    Target target;
    target.is_response = spec.target == "response.inverse_temperature";
    target.path = spec.target;
    targets_.push_back(std::move(target));
  }
}

std::vector<std::string> ParameterSpace::names() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const ParameterSpec& spec : specs_) out.push_back(spec.name);
  return out;
}

std::vector<double> ParameterSpace::to_natural(const std::vector<double>& sampled) const {
  std::vector<double> out(sampled.size());
  for (std::size_t d = 0; d < sampled.size(); ++d) {
    out[d] = hgf::to_natural(specs_[d].transform, sampled[d]);
  }
  return out;
}

std::vector<double> ParameterSpace::to_sampled(const std::vector<double>& natural) const {
  std::vector<double> out(natural.size());
  for (std::size_t d = 0; d < natural.size(); ++d) {
    out[d] = hgf::to_sampled(specs_[d].transform, natural[d]);
  }
  return out;
}

double ParameterSpace::log_prior(const std::vector<double>& sampled) const {
  if (sampled.size() != specs_.size()) {
    throw AlignmentError("parameter vector does not match the space dimension");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < sampled.size(); ++d) {
    const double lp = specs_[d].prior.log_density(sampled[d]);
    if (lp == kNegInf) return kNegInf;
    total += lp;
  }
  return total;
}

std::vector<double> ParameterSpace::sample_prior(Rng& rng) const {
  std::vector<double> out(specs_.size());
  for (std::size_t d = 0; d < specs_.size(); ++d) {
    out[d] = specs_[d].prior.sample(rng);
  }
  return out;
}

std::vector<double> ParameterSpace::prior_means() const {
  std::vector<double> out(specs_.size());
  for (std::size_t d = 0; d < specs_.size(); ++d) out[d] = specs_[d].prior.mean();
  return out;
}

std::vector<double> ParameterSpace::typical_scales() const {
  std::vector<double> out(specs_.size());
  for (std::size_t d = 0; d < specs_.size(); ++d) {
    out[d] = specs_[d].prior.typical_scale();
  }
  return out;
}

void ParameterSpace::apply(const std::vector<double>& natural, Network& net,
                           ResponseModel& response) const {
  if (natural.size() != specs_.size()) {
    throw AlignmentError("parameter vector does not match the space dimension");
  }
  for (std::size_t d = 0; d < natural.size(); ++d) {
    if (targets_[d].is_response) {
      if (!(std::isfinite(natural[d]) && natural[d] > 0.0)) {
        throw InvalidAttributeError("inverse temperature must be positive and finite");
      }
      response.inverse_temperature = natural[d];
    } else {
      set_attribute(net, targets_[d].path, natural[d]);
    }
  }
}

// --- posterior ---------------------------------------------------------------

double log_posterior(const ParameterSpace& space,
                     const std::vector<double>& sampled,
                     const SubjectData& data, const Model& model) {
  const double prior = space.log_prior(sampled);
  if (prior == kNegInf) return kNegInf;
  Model working = model;
  try {
    space.apply(space.to_natural(sampled), working.network, working.response);
    RunResult result = run(std::move(working.network), data.inputs);
    const double likelihood =
        log_likelihood(result.trajectory, data.actions, working.response);
    if (!std::isfinite(likelihood)) return kNegInf;
    return prior + likelihood;
  } catch (const NumericalError&) {
    return kNegInf;
  } catch (const DomainError&) {
    return kNegInf;
  } catch (const InvalidAttributeError&) {
    return kNegInf;
  }
}

// --- samples container -------------------------------------------------------

std::vector<double> PosteriorSamples::pooled(int param) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(chains()) *
              static_cast<std::size_t>(iterations()));
  for (const auto& chain : draws) {
    for (const auto& draw : chain) {
      out.push_back(draw[static_cast<std::size_t>(param)]);
    }
  }
  return out;
}

std::vector<std::vector<double>> PosteriorSamples::by_chain(int param) const {
  std::vector<std::vector<double>> out;
  out.reserve(draws.size());
  for (const auto& chain : draws) {
    std::vector<double> series;
    series.reserve(chain.size());
    for (const auto& draw : chain) {
      series.push_back(draw[static_cast<std::size_t>(param)]);
    }
    out.push_back(std::move(series));
  }
  return out;
}

int PosteriorSamples::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

// --- batch fitting -----------------------------------------------------------

std::vector<SubjectFit> batch_fit(const ParameterSpace& space,
                                  const std::vector<SubjectData>& dataset,
                                  const Model& model,
                                  const BatchOptions& options) {
  const int n = static_cast<int>(dataset.size());
  std::vector<SubjectFit> results(static_cast<std::size_t>(n));
  if (n == 0) return results;
  int workers = options.workers <= 0 ? 1 : options.workers;
  workers = std::min(workers, n);

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      SubjectFit& slot = results[static_cast<std::size_t>(i)];
      // Seeds depend only on the subject index, and every result lands in
      // its own preallocated slot, so the worker count cannot change output.
      const std::uint64_t seed =
          Rng::derive(options.seed, static_cast<std::uint64_t>(i));
      try {
        if (options.mode == FitMode::Map) {
          MapOptions map_options = options.map;
          map_options.seed = seed;
          slot.map = map_fit(space, dataset[static_cast<std::size_t>(i)], model,
                             map_options);
        } else {
          SamplerOptions sampler_options = options.sampler;
          sampler_options.seed = seed;
          slot.samples = sample(space, dataset[static_cast<std::size_t>(i)],
                                model, sampler_options);
        }
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.ok = false;
        slot.error = e.what();
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

// --- recovery ----------------------------------------------------------------

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (x.size() != y.size()) {
    throw AlignmentError("correlation needs series of equal length");
  }
  const std::size_t n = x.size();
  if (n < 2) return nan;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return nan;
  return sxy / std::sqrt(sxx * syy);
}

ParameterSpace default_inference_space(int omega_node) {
  ParameterSpec omega;
  omega.target = "node." + std::to_string(omega_node) + ".tonic_volatility";
  omega.prior = Prior::normal(-3.0, 2.0);
  omega.transform = Transform::Identity;
  omega.name = "omega";
  ParameterSpec temperature;
  temperature.target = "response.inverse_temperature";
  temperature.prior = Prior::normal(0.0, 1.0);
  temperature.transform = Transform::Log;
  temperature.name = "temperature";
  return ParameterSpace({omega, temperature});
}

ParameterSpace default_recovery_space(int omega_node) {
  ParameterSpec omega;
  omega.target = "node." + std::to_string(omega_node) + ".tonic_volatility";
  omega.prior = Prior::uniform(-6.0, 0.0);
  omega.transform = Transform::Identity;
  omega.name = "omega";
  ParameterSpec temperature;
  temperature.target = "response.inverse_temperature";
  temperature.prior = Prior::uniform(std::log(0.01), std::log(100.0));
  temperature.transform = Transform::Log;
  temperature.name = "temperature";
  return ParameterSpace({omega, temperature});
}

RecoveryReport recover(const Model& model, const ParameterSpace& space,
                       const RecoveryOptions& options) {
  if (options.subjects < 2) {
    throw ValidationError("recovery needs at least two subjects");
  }
  const int d = space.size();
  if (options.omega_index < 0 || options.omega_index >= d ||
      options.temperature_index < 0 || options.temperature_index >= d ||
      options.omega_index == options.temperature_index) {
    throw ValidationError("recovery parameter indices do not fit the space");
  }
  if (!(options.omega_range.first < options.omega_range.second) ||
      !(options.temperature_range.first > 0.0) ||
      !(options.temperature_range.first < options.temperature_range.second)) {
    throw ValidationError("recovery truth ranges are malformed");
  }

  RecoveryReport report;
  report.u = switching_task(options.trials, Rng::derive(options.seed, 0));
  const InputSeries inputs = series_from_column(report.u);
  const std::vector<double> base_natural =
      space.to_natural(space.prior_means());

  report.subjects.resize(static_cast<std::size_t>(options.subjects));
  std::vector<SubjectData> dataset;
  std::vector<int> fitted_index;  // report slot per dataset entry
  for (int i = 0; i < options.subjects; ++i) {
    RecoverySubject& subject = report.subjects[static_cast<std::size_t>(i)];
    Rng rng(Rng::derive(options.seed, 1000 + static_cast<std::uint64_t>(i)));
    subject.true_omega =
        rng.uniform(options.omega_range.first, options.omega_range.second);
    subject.true_temperature =
        std::exp(rng.uniform(std::log(options.temperature_range.first),
                             std::log(options.temperature_range.second)));
    std::vector<double> natural = base_natural;
    natural[static_cast<std::size_t>(options.omega_index)] = subject.true_omega;
    natural[static_cast<std::size_t>(options.temperature_index)] =
        subject.true_temperature;
    try {
      Model generator = model;
      space.apply(natural, generator.network, generator.response);
      RunResult sim = run(std::move(generator.network), inputs);
      SubjectData data;
      data.inputs = inputs;
      data.actions =
          simulate_actions(sim.trajectory, generator.response,
                           Rng::derive(options.seed, 2000 + static_cast<std::uint64_t>(i)));
      dataset.push_back(std::move(data));
      fitted_index.push_back(i);
    } catch (const std::exception& e) {
      subject.excluded = true;
      subject.note = std::string("simulation failed: ") + e.what();
    }
  }

  BatchOptions batch;
  batch.mode = FitMode::Map;
  batch.workers = options.workers;
  batch.seed = Rng::derive(options.seed, 3000);
  batch.map = options.map;
  const std::vector<SubjectFit> fits = batch_fit(space, dataset, model, batch);

  std::vector<double> true_omega, fit_omega, true_log_t, fit_log_t;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    RecoverySubject& subject =
        report.subjects[static_cast<std::size_t>(fitted_index[k])];
    const SubjectFit& fit = fits[k];
    if (!fit.ok) {
      subject.excluded = true;
      subject.note = "fit failed: " + fit.error;
      continue;
    }
    subject.fit_omega =
        fit.map.values[static_cast<std::size_t>(options.omega_index)];
    subject.fit_temperature =
        fit.map.values[static_cast<std::size_t>(options.temperature_index)];
    // Flag estimates saturating a flat prior's box edge.
    for (int which : {options.omega_index, options.temperature_index}) {
      const ParameterSpec& spec = space.specs()[static_cast<std::size_t>(which)];
      if (spec.prior.kind != Prior::Kind::Uniform) continue;
      const double z = hgf::to_sampled(
          spec.transform, fit.map.values[static_cast<std::size_t>(which)]);
      const double width = spec.prior.b - spec.prior.a;
      if (z - spec.prior.a < 0.02 * width || spec.prior.b - z < 0.02 * width) {
        subject.at_bound = true;
      }
    }
    true_omega.push_back(subject.true_omega);
    fit_omega.push_back(subject.fit_omega);
    true_log_t.push_back(std::log(subject.true_temperature));
    fit_log_t.push_back(std::log(subject.fit_temperature));
  }
  if (true_omega.size() >= 2) {
    report.r_omega = pearson(true_omega, fit_omega);
    report.r_log_temperature = pearson(true_log_t, fit_log_t);
  }
  return report;
}

// --- model comparison --------------------------------------------------------

namespace {

double log_sum_exp(const std::vector<double>& values) {
  double peak = kNegInf;
  for (double v : values) peak = std::max(peak, v);
  if (peak == kNegInf) return kNegInf;
  double total = 0.0;
  for (double v : values) total += std::exp(v - peak);
  return peak + std::log(total);
}

double sample_variance(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(n - 1);
}

}  // namespace

ComparisonReport compare_pointwise(
    const std::vector<std::string>& names,
    const std::vector<std::vector<std::vector<double>>>& loglik) {
  if (names.size() != loglik.size() || names.empty()) {
    throw ValidationError("comparison needs one name per log-likelihood matrix");
  }
  long trials = -1;
  for (const auto& matrix : loglik) {
    if (matrix.empty()) throw ValidationError("a model has no posterior draws");
    for (const auto& row : matrix) {
      if (trials < 0) trials = static_cast<long>(row.size());
      if (static_cast<long>(row.size()) != trials) {
        throw AlignmentError("pointwise log-likelihoods disagree on trial count");
      }
    }
  }
  if (trials <= 0) throw ValidationError("comparison needs at least one trial");

  ComparisonReport report;
  report.trials = trials;
  for (std::size_t m = 0; m < loglik.size(); ++m) {
    const auto& matrix = loglik[m];
    const double draw_count = static_cast<double>(matrix.size());
    ModelScore score;
    score.name = names[m];
    std::vector<double> column(matrix.size());
    for (long i = 0; i < trials; ++i) {
      for (std::size_t s = 0; s < matrix.size(); ++s) {
        column[s] = matrix[s][static_cast<std::size_t>(i)];
      }
      const double lppd = log_sum_exp(column) - std::log(draw_count);
      const double penalty = sample_variance(column);
      score.pointwise_lppd.push_back(lppd);
      score.pointwise_penalty.push_back(penalty);
      score.elpd += lppd - penalty;
      score.penalty += penalty;
    }
    std::vector<double> pointwise(static_cast<std::size_t>(trials));
    for (long i = 0; i < trials; ++i) {
      pointwise[static_cast<std::size_t>(i)] =
          score.pointwise_lppd[static_cast<std::size_t>(i)] -
          score.pointwise_penalty[static_cast<std::size_t>(i)];
    }
    score.elpd_se =
        std::sqrt(static_cast<double>(trials) * sample_variance(pointwise));
    report.models.push_back(std::move(score));
  }

  std::vector<std::size_t> order(report.models.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.models[a].elpd > report.models[b].elpd;
  });
  std::vector<ModelScore> ranked;
  ranked.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    ModelScore score = std::move(report.models[order[r]]);
    score.rank = static_cast<int>(r + 1);
    ranked.push_back(std::move(score));
  }
  const ModelScore& best = ranked.front();
  for (std::size_t r = 1; r < ranked.size(); ++r) {
    ModelScore& score = ranked[r];
    std::vector<double> diff(static_cast<std::size_t>(trials));
    for (long i = 0; i < trials; ++i) {
      const double a = best.pointwise_lppd[static_cast<std::size_t>(i)] -
                       best.pointwise_penalty[static_cast<std::size_t>(i)];
      const double b = score.pointwise_lppd[static_cast<std::size_t>(i)] -
                       score.pointwise_penalty[static_cast<std::size_t>(i)];
      diff[static_cast<std::size_t>(i)] = a - b;
    }
    score.se_diff_best =
        std::sqrt(static_cast<double>(trials) * sample_variance(diff));
  }
  report.models = std::move(ranked);
  return report;
}

ComparisonReport compare(const std::vector<std::string>& names,
                         const std::vector<Model>& models,
                         const std::vector<ParameterSpace>& spaces,
                         const SubjectData& data,
                         const std::vector<PosteriorSamples>& samples) {
  if (names.size() != models.size() || models.size() != spaces.size() ||
      models.size() != samples.size() || models.empty()) {
    throw ValidationError("comparison needs aligned names, models, spaces and samples");
  }
  std::vector<std::vector<std::vector<double>>> loglik(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    const PosteriorSamples& posterior = samples[m];
    for (int chain = 0; chain < posterior.chains(); ++chain) {
      for (int iter = 0; iter < posterior.iterations(); ++iter) {
        const std::vector<double>& natural =
            posterior.draws[static_cast<std::size_t>(chain)]
                           [static_cast<std::size_t>(iter)];
        Model working = models[m];
        spaces[m].apply(natural, working.network, working.response);
        RunResult result = run(std::move(working.network), data.inputs);
        const std::vector<double> p =
            action_probability(result.trajectory, working.response);
        if (p.size() != data.actions.size()) {
          throw AlignmentError("actions do not match the trajectory length");
        }
        std::vector<double> row;
        row.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
          const int y = data.actions[i];
          if (y == -1) continue;
          const double clamped =
              std::clamp(p[i], kProbFloor, 1.0 - kProbFloor);
          row.push_back(std::log(y == 1 ? clamped : 1.0 - clamped));
        }
        loglik[m].push_back(std::move(row));
      }
    }
  }
  return compare_pointwise(names, loglik);
}

}  // namespace hgf
