#include <cmath>
#include <vector>

#include "doctest.h"
#include "hgf/network.hpp"
#include "hgf/presets.hpp"
#include "hgf/response.hpp"
#include "hgf/task.hpp"

using namespace hgf;
using doctest::Approx;

namespace {

// A one-node binary trajectory with hand-picked expectations.
Trajectory traj_with(std::vector<double> expected_means) {
  Trajectory traj;
  traj.kinds = {NodeKind::Binary};
  traj.nodes.emplace_back();
  NodeTrace& trace = traj.nodes.back();
  const std::size_t n = expected_means.size();
  trace.expected_mean = std::move(expected_means);
  trace.mean.assign(n, 0.0);
  trace.precision.assign(n, 1.0);
  trace.expected_precision.assign(n, 1.0);
  trace.observation.assign(n, std::numeric_limits<double>::quiet_NaN());
  trace.surprise.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < n; ++s) {
    traj.time.push_back(static_cast<double>(s) + 1.0);
    traj.dt.push_back(1.0);
  }
  return traj;
}

ResponseModel model_with(double t) {
  ResponseModel model;
  model.inverse_temperature = t;
  return model;
}

}  // namespace

TEST_CASE("the temperature sigmoid matches its scalar oracle") {
  const ActionRule rule = response_family("temperature-sigmoid");
  CHECK(rule(0.7, model_with(2.0)) ==
        Approx(0.8448275862068965).epsilon(1e-14));
  // t = 1 reads the expectation out exactly, bit for bit.
  for (double mu : {0.001, 0.3, 0.5, 0.77, 0.999}) {
    CHECK(rule(mu, model_with(1.0)) == mu);
  }
  // Large t saturates toward a step function around 0.5.
  CHECK(rule(0.7, model_with(1000.0)) == Approx(1.0).epsilon(1e-6));
  CHECK(rule(0.3, model_with(1000.0)) == Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(rule(0.5, model_with(1000.0)) == Approx(0.5).epsilon(1e-12));
  // Zero or negative temperature is a configuration error, not a coin flip.
  CHECK_THROWS_AS(rule(0.9, model_with(0.0)), InvalidAttributeError);
  CHECK_THROWS_AS(rule(0.9, model_with(-2.0)), InvalidAttributeError);
  CHECK_THROWS_AS(rule(1.0, model_with(2.0)), DomainError);
  CHECK_THROWS_AS(rule(-0.1, model_with(2.0)), DomainError);

  const ActionRule unit = response_family("unit-sigmoid");
  CHECK(unit(0.77, model_with(5.0)) == 0.77);
  CHECK_THROWS_AS(response_family("no-such-family"), ValidationError);
}

TEST_CASE("action log likelihood scores recorded choices") {
  const Trajectory traj = traj_with({0.7});
  const ResponseModel model = model_with(2.0);
  CHECK(log_likelihood(traj, {1}, model) ==
        Approx(-0.16862271243579283).epsilon(1e-14));
  CHECK(log_likelihood(traj, {0}, model) ==
        Approx(-1.8632184332101993).epsilon(1e-14));
  CHECK(log_likelihood(traj, {-1}, model) == 0.0);  // missing action
  CHECK_THROWS_AS(log_likelihood(traj, {1, 0}, model), AlignmentError);

  // At mu = 0.5 each trial is exactly a coin flip whatever t is.
  const Trajectory coin = traj_with(std::vector<double>(12, 0.5));
  const std::vector<int> alternating = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(log_likelihood(coin, alternating, model_with(3.7)) ==
        Approx(-12.0 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("probabilities clamp away from 0 and 1 and count it") {
  // (0.99/0.01)^50 overwhelms the odds, so p saturates to 1 exactly and the
  // clamp kicks in.
  const Trajectory traj = traj_with({0.99});
  LikelihoodStats stats;
  const double ll = log_likelihood(traj, {0}, model_with(50.0), &stats);
  CHECK(stats.clamped == 1);
  // The clamp caps p at 1 - 1e-12; the observed action then scores
  // log(1 - (1 - 1e-12)), whose rounding differs slightly from log(1e-12).
  CHECK(ll == Approx(-27.63104323789336).epsilon(1e-13));
}

TEST_CASE("action probabilities come from the first binary node") {
  Network net = preset("binary-3");
  const std::vector<double> u = switching_task(40, 5);
  const Trajectory traj = run(std::move(net), series_from_column(u, 0)).trajectory;
  const std::vector<double> p = action_probability(traj, model_with(1.0));
  REQUIRE(p.size() == 40);
  for (long s = 0; s < 40; ++s) {
    CHECK(p[s] == traj.nodes[0].expected_mean[s]);
  }

  Network cont = preset("continuous-2");
  InputSeries series;
  series.observations.emplace_back(0, std::vector<double>{0.1, 0.2});
  const Trajectory no_binary = run(std::move(cont), series).trajectory;
  CHECK_THROWS_AS(action_probability(no_binary, model_with(1.0)), Error);
}

TEST_CASE("simulated actions are deterministic and track the probabilities") {
  const Trajectory traj = traj_with(std::vector<double>(2000, 0.7));
  const ResponseModel model = model_with(2.0);
  const std::vector<int> a = simulate_actions(traj, model, 42);
  const std::vector<int> b = simulate_actions(traj, model, 42);
  CHECK(a == b);
  const std::vector<int> c = simulate_actions(traj, model, 43);
  CHECK(a != c);
  double rate = 0.0;
  for (int y : a) rate += y;
  rate /= 2000.0;
  CHECK(rate == Approx(0.8448275862068965).epsilon(0.04));
}

TEST_CASE("custom response families can be registered and used") {
  register_response_family("always-left", [](double, const ResponseModel&) {
    return 0.25;
  });
  const ActionRule rule = response_family("always-left");
  CHECK(rule(0.9, model_with(1.0)) == 0.25);
  const Trajectory traj = traj_with({0.5, 0.5});
  ResponseModel model;
  model.family = "always-left";
  CHECK(log_likelihood(traj, {1, 1}, model) ==
        Approx(2.0 * std::log(0.25)).epsilon(1e-13));
}
