#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hgf/network.hpp"

namespace hgf {

// Maps belief trajectories to action probabilities. family names a registered
// rule; inverse_temperature is ignored by families that do not use it.
struct ResponseModel {
  std::string family = "temperature-sigmoid";
  double inverse_temperature = 1.0;
};

// p(y = 1) from the decision node's expected mean on one trial. Registered
// rules must be pure; expected_mean outside (0, 1) raises DomainError.
using ActionRule = std::function<double(double expected_mean,
                                        const ResponseModel& model)>;

// Built-in families:
//   "unit-sigmoid"         p = mu_hat (reads the expectation out directly)
//   "temperature-sigmoid"  p = mu_hat^t / (mu_hat^t + (1 - mu_hat)^t)
// temperature-sigmoid at t = 1 returns mu_hat exactly. Registration and
// lookup are mutex-guarded; rules are returned by value so a held rule
// survives later re-registration.
void register_response_family(const std::string& name, ActionRule rule);
ActionRule response_family(const std::string& name);

// Per-trial p(y = 1) along a trajectory, read from its first binary node
// (Error if the trajectory has none).
std::vector<double> action_probability(const Trajectory& traj,
                                       const ResponseModel& model);

struct LikelihoodStats {
  long clamped = 0;
};

// Bernoulli log likelihood of the recorded actions (0/1; -1 skips a trial).
// Probabilities are clamped to [1e-12, 1 - 1e-12] before the log; clamp
// events are counted into stats when given. Length mismatch raises
// AlignmentError.
double log_likelihood(const Trajectory& traj, const std::vector<int>& actions,
                      const ResponseModel& model,
                      LikelihoodStats* stats = nullptr);

// Samples one action per trial from the clamped action probabilities.
std::vector<int> simulate_actions(const Trajectory& traj,
                                  const ResponseModel& model,
                                  std::uint64_t seed);

}  // namespace hgf
