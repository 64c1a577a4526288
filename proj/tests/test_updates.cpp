#include <cmath>
#include <vector>

#include "doctest.h"
#include "hgf/network.hpp"
#include "hgf/presets.hpp"
#include "hgf/rng.hpp"
#include "hgf/task.hpp"
#include "hgf/updates.hpp"

using namespace hgf;
using doctest::Approx;

namespace {

Network lone_continuous(double mean, double precision, double omega) {
  Network net = new_network();
  NodeAttributes attrs;
  attrs.mean = mean;
  attrs.expected_mean = mean;
  attrs.precision = precision;
  attrs.expected_precision = precision;
  attrs.tonic_volatility = omega;
  net = add_node(std::move(net), NodeKind::Continuous, attrs);
  net.sequence = derive_update_sequence(net);
  return net;
}

}  // namespace

// Frozen scalar oracle, two-level binary chain: mu2 = 0, pi2 = 1,
// omega2 = -2, u = 1, dt = 1.
TEST_CASE("one-step binary chain matches the scalar oracle") {
  Network net = preset("binary-2");
  set_attribute(net, "node.1.tonic_volatility", -2.0);
  net = propagate(std::move(net), {{0, 1.0}}, 1.0);

  CHECK(get_attribute(net, "node.1.expected_precision") ==
        Approx(0.8807970779778823).epsilon(1e-14));
  CHECK(get_attribute(net, "node.1.precision") ==
        Approx(1.1307970779778822).epsilon(1e-14));
  CHECK(get_attribute(net, "node.1.mean") ==
        Approx(0.44216598162254866).epsilon(1e-14));
  CHECK(get_attribute(net, "node.0.expected_mean") == 0.5);
  CHECK(get_attribute(net, "node.0.expected_precision") == 4.0);
  CHECK(net.attributes[0].step.surprise ==
        Approx(0.6931471805599453).epsilon(1e-14));
  // The input node adopts the observation at its predicted precision.
  CHECK(get_attribute(net, "node.0.mean") == 1.0);
  CHECK(get_attribute(net, "node.0.precision") == 4.0);
}

// Frozen scalar oracle, single continuous node: mu = 0, pi = 1, omega = -2,
// observation precision 1, u = 1, dt = 1.
TEST_CASE("one-step continuous node matches the scalar oracle") {
  Network net = lone_continuous(0.0, 1.0, -2.0);
  net = propagate(std::move(net), {{0, 1.0}}, 1.0);

  CHECK(get_attribute(net, "node.0.expected_precision") ==
        Approx(0.8807970779778823).epsilon(1e-14));
  CHECK(get_attribute(net, "node.0.mean") ==
        Approx(0.5316894691665188).epsilon(1e-14));
  CHECK(get_attribute(net, "node.0.precision") ==
        Approx(1.8807970779778822).epsilon(1e-14));
  CHECK(net.attributes[0].step.surprise ==
        Approx(1.5324056364611702).epsilon(1e-14));
}

TEST_CASE("surprise functions are proper negative log probabilities") {
  CHECK(binary_surprise(0.5, 1.0) == Approx(0.6931471805599453).epsilon(1e-14));
  CHECK(binary_surprise(0.9, 1.0) == Approx(0.10536051565782628).epsilon(1e-13));
  CHECK(binary_surprise(0.9, 0.0) == Approx(-std::log(0.1)).epsilon(1e-13));
  CHECK_THROWS_AS(binary_surprise(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(binary_surprise(0.0, 1.0), DomainError);

  // exp(-s(1)) + exp(-s(0)) = 1 for any expectation.
  for (double mu : {0.01, 0.2, 0.5, 0.77, 0.999}) {
    const double total =
        std::exp(-binary_surprise(mu, 1.0)) + std::exp(-binary_surprise(mu, 0.0));
    CHECK(total == Approx(1.0).epsilon(1e-14));
  }

  CHECK(gaussian_surprise(0.0, 2.135335283236613, 1.0) ==
        Approx(1.5324056364611702).epsilon(1e-14));
  // Symmetric in the residual.
  CHECK(gaussian_surprise(0.3, 1.7, 0.3 + 0.4) ==
        gaussian_surprise(0.3, 1.7, 0.3 - 0.4));
  // Simpson integral of exp(-s) over a wide grid is 1.
  double integral = 0.0;
  const int k = 2000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / k;
  for (int i = 0; i <= k; ++i) {
    const double weight = (i == 0 || i == k) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += weight * std::exp(-gaussian_surprise(0.4, 2.5, lo + i * h));
  }
  integral *= h / 3.0;
  CHECK(integral == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("precisions stay positive across random chains") {
  Rng rng(991);
  const char* names[] = {"binary-2", "binary-3", "continuous-2", "continuous-3"};
  int completed = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Network net = preset(names[trial % 4]);
    const bool binary = net.kinds[0] == NodeKind::Binary;
    for (int k = binary ? 1 : 0; k < net.size(); ++k) {
      set_attribute(net, "node." + std::to_string(k) + ".tonic_volatility",
                    -6.0 + 6.0 * rng.uniform());
    }
    InputSeries series;
    std::vector<double> u(100);
    for (double& v : u) {
      v = binary ? (rng.uniform() < 0.5 ? 0.0 : 1.0) : rng.normal();
    }
    series.observations.emplace_back(0, u);
    RunResult result;
    try {
      result = run(std::move(net), series);
    } catch (const NumericalError& e) {
      // Wild volatility draws can push a binary prediction to exactly 0 or
      // 1; the engine refuses loudly instead of dividing by zero, and that
      // refusal is an acceptable outcome here.
      CHECK(std::string(e.what()).find("saturated") != std::string::npos);
      continue;
    }
    ++completed;
    for (int k = 0; k < result.trajectory.node_count(); ++k) {
      const NodeTrace& trace = result.trajectory.nodes[k];
      for (long s = 0; s < 100; ++s) {
        CHECK(std::isfinite(trace.precision[s]));
        CHECK(trace.precision[s] > 0.0);
        CHECK(std::isfinite(trace.expected_precision[s]));
        CHECK(trace.expected_precision[s] > 0.0);
        CHECK(std::isfinite(trace.mean[s]));
      }
    }
    CHECK(std::isfinite(result.trajectory.nodes[0].surprise[0]));
  }
  // The guard should be the exception, not the rule.
  CHECK(completed >= 50);
}

TEST_CASE("the volatility exponent clamps below and errors above") {
  Network calm = lone_continuous(0.0, 1.0, -60.0);
  calm = propagate(std::move(calm), {{0, 0.5}}, 1.0);
  // exp(-50) vanishes against 1/pi, so the prediction keeps full precision.
  CHECK(get_attribute(calm, "node.0.expected_precision") == 1.0);

  Network explosive = lone_continuous(0.0, 1.0, 60.0);
  CHECK_THROWS_AS(propagate(std::move(explosive), {{0, 0.5}}, 1.0),
                  NumericalError);
  try {
    Network again = lone_continuous(0.0, 1.0, 60.0);
    propagate(std::move(again), {{0, 0.5}}, 1.0);
  } catch (const NumericalError& e) {
    CHECK(e.node() == 0);
    CHECK(std::string(e.what()).find("node 0") != std::string::npos);
  }
}

TEST_CASE("a zero value error leaves the value parent's mean fixed") {
  Network net = new_network();
  NodeAttributes child;
  child.mean = 0.3;
  child.expected_mean = 0.3;
  net = add_node(std::move(net), NodeKind::Continuous, child);
  net = add_node(std::move(net), NodeKind::Continuous);
  net = add_edge(std::move(net), 0, 1, Coupling::Value, 1.0);
  net.sequence = derive_update_sequence(net);

  // Parent expectation is 0, so the child predicts 0.3 and observes 0.3.
  net = propagate(std::move(net), {{0, 0.3}}, 1.0);
  CHECK(get_attribute(net, "node.0.mean") == Approx(0.3).epsilon(1e-14));
  CHECK(std::fabs(get_attribute(net, "node.1.mean")) < 1e-15);
  // The precision channel still tightens.
  CHECK(get_attribute(net, "node.1.precision") > 1.0);
}

TEST_CASE("prediction errors demand a prior prediction") {
  Network net = preset("binary-2");
  CHECK_THROWS_AS(prediction_error(net, 0), SequencingError);
}

TEST_CASE("a frozen volatility coupling reproduces the smaller chain") {
  Network three = preset("binary-3");
  set_attribute(three, "node.1.volatility_coupling.0", 0.0);
  Network two = preset("binary-2");

  const std::vector<double> u = switching_task(50, 17);
  const InputSeries series = series_from_column(u, 0);
  const Trajectory a = run(std::move(three), series).trajectory;
  const Trajectory b = run(std::move(two), series).trajectory;
  for (int k = 0; k < 2; ++k) {
    for (long s = 0; s < 50; ++s) {
      CHECK(a.nodes[k].mean[s] == Approx(b.nodes[k].mean[s]).epsilon(1e-12));
      CHECK(a.nodes[k].precision[s] ==
            Approx(b.nodes[k].precision[s]).epsilon(1e-12));
    }
  }
}
