#include "hgf/updates.hpp"

#include <cmath>

#include "hgf/errors.hpp"

namespace hgf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// Volatility exponents above this blow up the step variance; below the
// negative bound the dilution underflows harmlessly, so it is clamped.
constexpr double kVolatilityExponentCap = 50.0;

double coupling_to(const Network& net, int child, int parent, Coupling type) {
  const auto& parents = net.edges.parents(child, type);
  const auto& coupling =
      type == Coupling::Value
          ? net.attributes[static_cast<std::size_t>(child)].value_coupling
          : net.attributes[static_cast<std::size_t>(child)].volatility_coupling;
  for (std::size_t j = 0; j < parents.size(); ++j) {
    if (parents[j] == parent) return coupling[j];
  }
  throw ValidationError("edge " + std::to_string(child) + " -> " +
                        std::to_string(parent) + " (" + to_string(type) +
                        ") is not present");
}

}  // namespace

Network prediction(Network net, int node) {
  if (node < 0 || node >= net.size()) {
    throw IndexError("prediction targets node " + std::to_string(node) +
                     " which does not exist");
  }
  NodeAttributes& a = net.attributes[static_cast<std::size_t>(node)];
  const double dt = net.current_dt;

  if (net.kinds[static_cast<std::size_t>(node)] == NodeKind::Binary) {
    double total = 0.0;
    const auto& parents = net.edges.parents(node, Coupling::Value);
    for (std::size_t j = 0; j < parents.size(); ++j) {
      total += a.value_coupling[j] *
               net.attributes[static_cast<std::size_t>(parents[j])].expected_mean;
    }
    const double mu_hat = 1.0 / (1.0 + std::exp(-total));
    const double spread = mu_hat * (1.0 - mu_hat);
    if (!(spread > 0.0) || !std::isfinite(mu_hat)) {
      throw NumericalError("binary prediction saturated at 0 or 1", node,
                           net.step_count);
    }
    a.expected_mean = mu_hat;
    a.expected_precision = 1.0 / spread;
  } else {
    double drift = extra_or(a, "drift", 0.0);
    const double ar_strength = extra_or(a, "autoregression_strength", 0.0);
    if (ar_strength != 0.0) {
      drift += ar_strength * (extra_or(a, "autoregression_target", 0.0) - a.mean);
    }
    const auto& value_parents = net.edges.parents(node, Coupling::Value);
    for (std::size_t j = 0; j < value_parents.size(); ++j) {
      drift += a.value_coupling[j] *
               net.attributes[static_cast<std::size_t>(value_parents[j])].expected_mean;
    }
    const double mu_hat = a.mean + dt * drift;

    double exponent = a.tonic_volatility;
    const auto& volatility_parents = net.edges.parents(node, Coupling::Volatility);
    for (std::size_t j = 0; j < volatility_parents.size(); ++j) {
      exponent += a.volatility_coupling[j] *
                  net.attributes[static_cast<std::size_t>(volatility_parents[j])]
                      .expected_mean;
    }
    if (!std::isfinite(exponent) || exponent > kVolatilityExponentCap) {
      throw NumericalError("volatility exponent " + std::to_string(exponent) +
                           " exceeds the overflow cap", node, net.step_count);
    }
    exponent = std::max(exponent, -kVolatilityExponentCap);
    const double predicted_volatility = dt * std::exp(exponent);
    const double pi_hat = 1.0 / (1.0 / a.precision + predicted_volatility);
    if (!std::isfinite(mu_hat) || !std::isfinite(pi_hat) || !(pi_hat > 0.0)) {
      throw NumericalError("non-finite prediction", node, net.step_count);
    }
    a.step.predicted_volatility = predicted_volatility;
    a.expected_mean = mu_hat;
    a.expected_precision = pi_hat;
  }
  a.step.predicted = true;
  return net;
}

PredictionError prediction_error(const Network& net, int node) {
  if (node < 0 || node >= net.size()) {
    throw IndexError("prediction error targets node " + std::to_string(node) +
                     " which does not exist");
  }
  const NodeAttributes& a = net.attributes[static_cast<std::size_t>(node)];
  if (!a.step.predicted) {
    throw SequencingError("prediction error for node " + std::to_string(node) +
                          " requested before its prediction");
  }
  PredictionError pe;
  pe.node = node;
  pe.value_pe = a.mean - a.expected_mean;
  pe.expected_precision_at_emit = a.expected_precision;
  if (!net.edges.parents(node, Coupling::Volatility).empty()) {
    // Relative precision error: how the realized spread compares with the
    // predicted one.
    pe.volatility_pe =
        (1.0 / a.precision + pe.value_pe * pe.value_pe) * a.expected_precision -
        1.0;
    pe.has_volatility_pe = true;
  }
  return pe;
}

Network posterior_update(Network net, int node) {
  if (node < 0 || node >= net.size()) {
    throw IndexError("posterior update targets node " + std::to_string(node) +
                     " which does not exist");
  }
  double precision_gain = 0.0;
  double weighted_value_error = 0.0;
  double weighted_volatility_error = 0.0;
  bool any = false;

  for (int c : net.edges.children(node, Coupling::Value)) {
    const NodeAttributes& child = net.attributes[static_cast<std::size_t>(c)];
    if (!child.step.has_value_pe) continue;
    any = true;
    const double kappa = coupling_to(net, c, node, Coupling::Value);
    const double pi_hat_child = child.step.expected_precision_at_pe;
    if (net.kinds[static_cast<std::size_t>(c)] == NodeKind::Binary) {
      // For a Bernoulli child the predictive spread 1/pi_hat is the gain and
      // the error enters unweighted.
      precision_gain += kappa * kappa / pi_hat_child;
      weighted_value_error += kappa * child.step.value_pe;
    } else {
      precision_gain += kappa * kappa * pi_hat_child;
      weighted_value_error += kappa * pi_hat_child * child.step.value_pe;
    }
  }

  for (int c : net.edges.children(node, Coupling::Volatility)) {
    const NodeAttributes& child = net.attributes[static_cast<std::size_t>(c)];
    if (!child.step.has_volatility_pe) continue;
    any = true;
    const double kappa = coupling_to(net, c, node, Coupling::Volatility);
    // Effective volatility weight of the child this step.
    const double gamma =
        child.step.predicted_volatility * child.step.expected_precision_at_pe;
    const double delta = child.step.volatility_pe;
    precision_gain += 0.5 * kappa * kappa * gamma *
                      (gamma + (2.0 * gamma - 1.0) * delta);
    weighted_volatility_error += 0.5 * kappa * gamma * delta;
  }

  if (!any) return net;  // nothing observed below this node this step

  NodeAttributes& a = net.attributes[static_cast<std::size_t>(node)];
  if (!a.step.predicted) {
    throw SequencingError("posterior update for node " + std::to_string(node) +
                          " requested before its prediction");
  }
  // An observation at this node already moved the posterior this step; the
  // children's evidence then stacks on top of it sequentially.
  const double base_mean = a.step.updated ? a.mean : a.expected_mean;
  const double base_precision = a.step.updated ? a.precision : a.expected_precision;
  const double posterior_precision = base_precision + precision_gain;
  if (!std::isfinite(posterior_precision) || !(posterior_precision > 0.0)) {
    throw NumericalError("ill-posed posterior precision", node, net.step_count);
  }
  const double posterior_mean =
      base_mean +
      (weighted_value_error + weighted_volatility_error) / posterior_precision;
  if (!std::isfinite(posterior_mean)) {
    throw NumericalError("non-finite posterior mean", node, net.step_count);
  }
  a.mean = posterior_mean;
  a.precision = posterior_precision;
  a.step.updated = true;
  return net;
}

double binary_surprise(double expected_mean, double u) {
  if (u != 0.0 && u != 1.0) {
    throw ValidationError("binary surprise requires an outcome of exactly 0 or 1");
  }
  if (!(expected_mean >= 0.0 && expected_mean <= 1.0)) {
    throw DomainError("binary expectation must lie in [0, 1]");
  }
  const double p = u == 1.0 ? expected_mean : 1.0 - expected_mean;
  if (p <= 0.0) {
    throw DomainError("surprise is infinite: expectation pinned against the outcome");
  }
  return -std::log(p);
}

double gaussian_surprise(double expected_mean, double variance, double u) {
  if (!(std::isfinite(variance) && variance > 0.0)) {
    throw DomainError("gaussian surprise requires a positive finite variance");
  }
  const double d = u - expected_mean;
  return 0.5 * (std::log(kTwoPi * variance) + d * d / variance);
}

namespace {

Network emit_prediction_error(Network net, int node) {
  NodeAttributes& a = net.attributes[static_cast<std::size_t>(node)];
  // Only nodes whose posterior moved this step carry news for their parents.
  if (!(a.step.observed || a.step.updated)) return net;
  PredictionError pe = prediction_error(net, node);
  a.step.value_pe = pe.value_pe;
  a.step.expected_precision_at_pe = pe.expected_precision_at_emit;
  a.step.has_value_pe = true;
  if (pe.has_volatility_pe) {
    a.step.volatility_pe = pe.volatility_pe;
    a.step.has_volatility_pe = true;
  }
  return net;
}

}  // namespace

void install_standard_functions(Network& net) {
  net.functions["prediction"] = UpdateEntry{prediction, Phase::Prediction};
  net.functions["prediction_error"] =
      UpdateEntry{emit_prediction_error, Phase::Update};
  net.functions["posterior_update"] = UpdateEntry{posterior_update, Phase::Update};
}

}  // namespace hgf
