#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hgf/network.hpp"
#include "hgf/response.hpp"
#include "hgf/rng.hpp"

namespace hgf {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Prior {
  enum class Kind { Normal, HalfNormal, Uniform };
  Kind kind = Kind::Normal;
  // Normal: a = mean, b = sd. HalfNormal: b = scale. Uniform: a < b.
  double a = 0.0;
  double b = 1.0;

  static Prior normal(double mean, double sd);
  static Prior half_normal(double scale);
  static Prior uniform(double lo, double hi);

  // Log density at x; -inf outside the support.
  double log_density(double x) const;
  double sample(Rng& rng) const;
  // A characteristic width, used for proposal and search scales.
  double typical_scale() const;
  // A central starting value (mean; HalfNormal uses its mean).
  double mean() const;
  std::pair<double, double> support() const;
};

// Transform from the natural attribute value to the sampled coordinate.
// Priors are densities of the sampled coordinate: with Transform::Log, a
// Normal(0, 1) prior on an inverse temperature is a standard normal on its
// logarithm. Draws are reported back in natural space.
enum class Transform { Identity, Log };

double to_natural(Transform t, double sampled);
double to_sampled(Transform t, double natural);

struct ParameterSpec {
  // Attribute path: "response.inverse_temperature", "node.<i>.mean",
  // "node.<i>.precision", "node.<i>.tonic_volatility",
  // "node.<i>.value_coupling.<j>", "node.<i>.volatility_coupling.<j>",
  // "node.<i>.extra.<key>".
  std::string target;
  Prior prior;
  Transform transform = Transform::Identity;
  // Report name; empty derives one from the target's last segments.
  std::string name;
};

class ParameterSpace {
 public:
  // The nested Target type is only complete in the implementation, so the
  // special members live there too.
  ParameterSpace();
  ParameterSpace(const ParameterSpace&);
  ParameterSpace(ParameterSpace&&) noexcept;
  ParameterSpace& operator=(const ParameterSpace&);
  ParameterSpace& operator=(ParameterSpace&&) noexcept;
  ~ParameterSpace();
  // Validates and parses the targets; malformed paths raise
  // InvalidAttributeError, schema problems ValidationError.
  explicit ParameterSpace(std::vector<ParameterSpec> specs);

  int size() const { return static_cast<int>(specs_.size()); }
  const std::vector<ParameterSpec>& specs() const { return specs_; }
  std::vector<std::string> names() const;

  std::vector<double> to_natural(const std::vector<double>& sampled) const;
  std::vector<double> to_sampled(const std::vector<double>& natural) const;
  // Joint prior log density over sampled coordinates; -inf off support.
  double log_prior(const std::vector<double>& sampled) const;
  std::vector<double> sample_prior(Rng& rng) const;
  std::vector<double> prior_means() const;
  std::vector<double> typical_scales() const;

  // Writes natural values into the model components. Unknown node indices
  // raise IndexError, bad values InvalidAttributeError.
  void apply(const std::vector<double>& natural, Network& net,
             ResponseModel& response) const;

 private:
  struct Target;
  std::vector<ParameterSpec> specs_;
  std::vector<Target> targets_;
};

struct Model {
  Network network;
  ResponseModel response;
};

struct SubjectData {
  InputSeries inputs;
  std::vector<int> actions;
};

// Prior + Bernoulli action likelihood at the sampled coordinates. Numerical
// failures during belief propagation and off-support coordinates both yield
// -inf, so the samplers treat them as ordinary rejections.
double log_posterior(const ParameterSpace& space,
                     const std::vector<double>& sampled,
                     const SubjectData& data, const Model& model);

// --- sampling ----------------------------------------------------------------

struct SamplerOptions {
  int chains = 4;
  int draws = 1000;
  int warmup = 1000;
  std::uint64_t seed = 1;
  // Thread count for chains; 0 runs one thread per chain.
  int workers = 0;
};

struct PosteriorSamples {
  std::vector<std::string> names;
  // draws[chain][iteration][parameter], natural space.
  std::vector<std::vector<std::vector<double>>> draws;
  // Post-warmup acceptance rate per chain.
  std::vector<double> acceptance;

  int chains() const { return static_cast<int>(draws.size()); }
  int iterations() const {
    return draws.empty() ? 0 : static_cast<int>(draws.front().size());
  }
  int parameters() const { return static_cast<int>(names.size()); }
  // All chains concatenated for one parameter.
  std::vector<double> pooled(int param) const;
  // Per-chain series for one parameter.
  std::vector<std::vector<double>> by_chain(int param) const;
  int index_of(const std::string& name) const;  // -1 when absent
};

using LogDensity = std::function<double(const std::vector<double>&)>;

// Adaptive random-walk Metropolis over an arbitrary log density. Proposal
// scales adapt toward a 20-40% acceptance rate during warmup (windowed
// multiplicative tuning plus one mid-warmup spread re-estimate) and are
// frozen afterwards. Chains run in parallel with seeds derived from
// options.seed by chain index, so results are independent of threading.
// inits supplies one starting point per chain. A chain whose warmup accepts
// nothing raises SamplerError.
PosteriorSamples sample_density(const LogDensity& target,
                                const std::vector<std::string>& names,
                                const std::vector<std::vector<double>>& inits,
                                const std::vector<double>& scales,
                                const SamplerOptions& options);

// Posterior sampling for one subject. Chain starts are prior draws with
// finite log posterior (up to 100 attempts per chain, then SamplerError).
// Reported draws are mapped to natural space.
PosteriorSamples sample(const ParameterSpace& space, const SubjectData& data,
                        const Model& model, const SamplerOptions& options = {});

// --- diagnostics and summaries ----------------------------------------------

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
  double ess_bulk = 0.0;
  double rhat = 0.0;
  double mcse_mean = 0.0;
};

struct SummaryTable {
  double hdi_mass = 0.94;
  std::vector<ParameterSummary> rows;
  const ParameterSummary& row(const std::string& name) const;
};

// Split R-hat over per-chain series; identical constant chains report 1.0.
double split_rhat(const std::vector<std::vector<double>>& chains);
// Rank-normalized bulk effective sample size (split chains, Geyer pairing).
double ess_bulk(const std::vector<std::vector<double>>& chains);
// Narrowest contiguous interval containing ceil(mass * n) sorted draws.
std::pair<double, double> hdi(std::vector<double> draws, double mass);

// Requires >= 2 chains (SamplerError otherwise) and 0 < hdi_mass <= 1.
SummaryTable summarize(const PosteriorSamples& samples, double hdi_mass = 0.94);

// --- optimization ------------------------------------------------------------

struct NelderMeadOptions {
  int max_iterations = 0;  // 0 = 400 * dimension
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-9;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimizes f by the standard simplex moves, terminating on simplex spread.
// Infinite f values are handled as worst-possible vertices.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start,
                             const std::vector<double>& step,
                             const NelderMeadOptions& options = {});

struct MapEstimate {
  std::vector<std::string> names;
  std::vector<double> values;  // natural space
  double log_posterior = kNegInf;
};

struct MapOptions {
  int restarts = 3;
  std::uint64_t seed = 0;
  NelderMeadOptions nelder_mead;
};

// Maximum a-posteriori fit via multi-start Nelder-Mead in sampled
// coordinates; start 0 is the prior mean, later starts are prior draws.
// All starts failing with -inf raises OptimizationError.
MapEstimate map_fit(const ParameterSpace& space, const SubjectData& data,
                    const Model& model, const MapOptions& options = {});

// --- batch fitting -----------------------------------------------------------

enum class FitMode { Map, Sample };

struct BatchOptions {
  FitMode mode = FitMode::Map;
  int workers = 1;
  std::uint64_t seed = 0;
  MapOptions map;
  SamplerOptions sampler;
};

struct SubjectFit {
  bool ok = false;
  MapEstimate map;
  PosteriorSamples samples;
  std::string error;
};

// Fits every subject independently. Per-subject seeds derive from
// options.seed and the subject index, and results land in preallocated
// slots, so output is identical for any worker count. A subject whose fit
// throws is reported in its slot, not propagated.
std::vector<SubjectFit> batch_fit(const ParameterSpace& space,
                                  const std::vector<SubjectData>& dataset,
                                  const Model& model,
                                  const BatchOptions& options = {});

// --- parameter recovery ------------------------------------------------------

struct RecoveryOptions {
  int subjects = 50;
  long trials = 320;
  // True generative draws: omega uniform on this range.
  std::pair<double, double> omega_range = {-4.5, -1.5};
  // True inverse temperatures: log-uniform on this range.
  std::pair<double, double> temperature_range = {0.5, 4.0};
  std::uint64_t seed = 0;
  int workers = 1;
  MapOptions map;
  // Positions of the volatility and temperature parameters in the space.
  int omega_index = 0;
  int temperature_index = 1;
};

struct RecoverySubject {
  double true_omega = 0.0;
  double true_temperature = 0.0;
  double fit_omega = std::numeric_limits<double>::quiet_NaN();
  double fit_temperature = std::numeric_limits<double>::quiet_NaN();
  bool at_bound = false;
  bool excluded = false;
  std::string note;
};

struct RecoveryReport {
  std::vector<RecoverySubject> subjects;
  double r_omega = std::numeric_limits<double>::quiet_NaN();
  double r_log_temperature = std::numeric_limits<double>::quiet_NaN();
  // The shared outcome sequence all subjects observed.
  std::vector<double> u;
};

// Simulates subjects on one shared switching-task outcome sequence, fits each
// by MAP, and correlates truth with estimates (temperature on the log scale).
// Estimates within 2% of a Uniform support edge are flagged at_bound;
// subjects whose simulation or fit fails are excluded and noted, and excluded
// subjects drop out of the correlations.
RecoveryReport recover(const Model& model, const ParameterSpace& space,
                       const RecoveryOptions& options = {});

// Standard two-parameter spaces over a chain model: tonic volatility of
// omega_node, and the response inverse temperature on the log scale.
// Inference: omega ~ Normal(-3, 2), ln t ~ Normal(0, 1).
ParameterSpace default_inference_space(int omega_node = 1);
// Recovery: flat boxes, omega ~ Uniform(-6, 0), ln t ~ Uniform(ln 0.01, ln 100).
ParameterSpace default_recovery_space(int omega_node = 1);

// --- model comparison --------------------------------------------------------

struct ModelScore {
  std::string name;
  // Expected log pointwise predictive density, WAIC-estimated, sum scale.
  double elpd = 0.0;
  double penalty = 0.0;
  double elpd_se = 0.0;
  // Paired-difference standard error against the top-ranked model (0 there).
  double se_diff_best = 0.0;
  int rank = 0;
  std::vector<double> pointwise_lppd;
  std::vector<double> pointwise_penalty;
};

struct ComparisonReport {
  std::string estimator = "waic";
  long trials = 0;
  // Sorted by rank, best first.
  std::vector<ModelScore> models;
};

// WAIC comparison from per-model pointwise log-likelihood matrices
// (loglik[model][draw][trial]). Trial counts must match across models
// (AlignmentError otherwise).
ComparisonReport compare_pointwise(
    const std::vector<std::string>& names,
    const std::vector<std::vector<std::vector<double>>>& loglik);

// Computes the matrices by replaying every posterior draw through each
// model's trajectory and scoring the shared actions.
ComparisonReport compare(const std::vector<std::string>& names,
                         const std::vector<Model>& models,
                         const std::vector<ParameterSpace>& spaces,
                         const SubjectData& data,
                         const std::vector<PosteriorSamples>& samples);

// --- multilevel --------------------------------------------------------------

// Hyperpriors for the group model. Means default to the space's own priors;
// group standard deviations are HalfNormal with these scales (default 1.0).
struct GroupPriors {
  std::vector<Prior> mean;
  std::vector<double> sigma_scale;
};

struct MultilevelOptions {
  int chains = 4;
  int draws = 1000;
  int warmup = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
};

// Non-centered hierarchical model over the space's parameters: subject i
// samples coordinate mu_p + sigma_p * z_ip with z_ip ~ Normal(0, 1). The
// sampler is blockwise adaptive Metropolis (hyperparameter block, then one
// block per subject) with per-subject likelihood caching. Needs >= 5
// subjects. Reported columns: "mu_<p>" and "sigma_<p>" on the sampled scale
// (log-transformed parameters report as mu_log_<name>), then each subject's
// natural parameter as "<name>[i]".
PosteriorSamples multilevel_sample(const ParameterSpace& space,
                                   const std::vector<SubjectData>& dataset,
                                   const Model& model,
                                   const GroupPriors& priors = {},
                                   const MultilevelOptions& options = {});

// Pearson correlation; NaN for fewer than 2 points or zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hgf
