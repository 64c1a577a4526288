#pragma once

#include "hgf/network.hpp"

namespace hgf {

struct PredictionError {
  int node = 0;
  // delta: posterior (or observed) mean minus expected mean.
  double value_pe = 0.0;
  // Delta: relative precision error, only meaningful with volatility parents.
  double volatility_pe = 0.0;
  bool has_volatility_pe = false;
  double expected_precision_at_emit = 0.0;
};

// Prediction step for one node. Continuous: drifts the expected mean by
// dt * (drift + autoregression + value-parent contributions) and dilutes the
// expected precision by the dt-scaled predicted volatility
// exp(omega + sum kappa * mu_hat_parent). Binary: expected mean is the
// logistic of the summed value-parent expectations, expected precision its
// Bernoulli precision 1 / (mu_hat (1 - mu_hat)).
// The volatility exponent is clamped below at -50; above +50 it raises
// NumericalError (explosive volatility), as do non-positive or non-finite
// resulting precisions.
Network prediction(Network net, int node);

// Pure query: computes the node's current prediction errors from its state.
// Requires the node's prediction for this step (SequencingError otherwise).
PredictionError prediction_error(const Network& net, int node);

// Posterior update for one node from its children's stored prediction
// errors. Value children contribute precision-weighted value errors;
// volatility children contribute through their relative precision errors.
// Children that emitted nothing this step contribute nothing; with no
// contributions at all the step is a no-op. A non-positive or non-finite
// posterior precision raises NumericalError.
// If the node was already updated this step (an observation at an internal
// node), the update composes sequentially on top of the current posterior.
Network posterior_update(Network net, int node);

// -ln p(u) for a Bernoulli prediction expected_mean. An expectation pinned at
// exactly 0 or 1 that contradicts u has infinite surprise, which is raised as
// DomainError rather than returned. During propagation this is rethrown as
// NumericalError with the node and step attached.
double binary_surprise(double expected_mean, double u);

// -ln N(u; expected_mean, variance).
double gaussian_surprise(double expected_mean, double variance, double u);

// Registers "prediction", "prediction_error" and "posterior_update" in the
// network's function registry. new_network() starts from this set.
void install_standard_functions(Network& net);

}  // namespace hgf
