#include "hgf/response.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "hgf/errors.hpp"
#include "hgf/rng.hpp"

namespace hgf {

namespace {

constexpr double kProbFloor = 1e-12;

double checked_expectation(double mu_hat) {
  if (!(mu_hat > 0.0 && mu_hat < 1.0)) {
    throw DomainError("action probability needs an expectation strictly inside "
                      "(0, 1), got " + std::to_string(mu_hat));
  }
  return mu_hat;
}

double unit_sigmoid(double mu_hat, const ResponseModel&) {
  return checked_expectation(mu_hat);
}

double temperature_sigmoid(double mu_hat, const ResponseModel& model) {
  checked_expectation(mu_hat);
  const double t = model.inverse_temperature;
  if (!(std::isfinite(t) && t > 0.0)) {
    throw InvalidAttributeError("inverse temperature must be positive and finite");
  }
  if (t == 1.0) return mu_hat;  // exact identity, no log round trip
  // mu^t / (mu^t + (1-mu)^t) rewritten through the logit so large t cannot
  // underflow both powers at once.
  const double logit = std::log(mu_hat) - std::log1p(-mu_hat);
  const double x = t * logit;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ActionRule>& registry() {
  static std::map<std::string, ActionRule> rules = {
      {"unit-sigmoid", unit_sigmoid},
      {"temperature-sigmoid", temperature_sigmoid},
  };
  return rules;
}

int first_binary_node(const Trajectory& traj) {
  for (int k = 0; k < traj.node_count(); ++k) {
    if (traj.kinds[static_cast<std::size_t>(k)] == NodeKind::Binary) return k;
  }
  throw ValidationError("trajectory has no binary node to read decisions from");
}

double clamp_probability(double p, LikelihoodStats* stats) {
  if (p < kProbFloor) {
    if (stats) ++stats->clamped;
    return kProbFloor;
  }
  if (p > 1.0 - kProbFloor) {
    if (stats) ++stats->clamped;
    return 1.0 - kProbFloor;
  }
  return p;
}

}  // namespace

void register_response_family(const std::string& name, ActionRule rule) {
  if (name.empty() || !rule) {
    throw ValidationError("response families need a name and a callable rule");
  }
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(rule);
}

ActionRule response_family(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) {
    throw ValidationError("unknown response family '" + name + "'");
  }
  return it->second;
}

std::vector<double> action_probability(const Trajectory& traj,
                                       const ResponseModel& model) {
  const int node = first_binary_node(traj);
  const ActionRule rule = response_family(model.family);
  const auto& mu_hat = traj.nodes[static_cast<std::size_t>(node)].expected_mean;
  std::vector<double> p;
  p.reserve(mu_hat.size());
  for (double m : mu_hat) p.push_back(rule(m, model));
  return p;
}

double log_likelihood(const Trajectory& traj, const std::vector<int>& actions,
                      const ResponseModel& model, LikelihoodStats* stats) {
  const std::vector<double> p = action_probability(traj, model);
  if (actions.size() != p.size()) {
    throw AlignmentError("recorded actions do not match the trajectory length (" +
                         std::to_string(actions.size()) + " vs " +
                         std::to_string(p.size()) + ")");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int y = actions[i];
    if (y == -1) continue;  // missing response
    if (y != 0 && y != 1) {
      throw ValidationError("actions must be 0, 1 or -1 for missing (row " +
                            std::to_string(i + 1) + ")");
    }
    const double clamped = clamp_probability(p[i], stats);
    total += std::log(y == 1 ? clamped : 1.0 - clamped);
  }
  return total;
}

std::vector<int> simulate_actions(const Trajectory& traj,
                                  const ResponseModel& model,
                                  std::uint64_t seed) {
  const std::vector<double> p = action_probability(traj, model);
  Rng rng(seed);
  std::vector<int> actions;
  actions.reserve(p.size());
  for (double prob : p) {
    actions.push_back(rng.bernoulli(clamp_probability(prob, nullptr)));
  }
  return actions;
}

}  // namespace hgf
