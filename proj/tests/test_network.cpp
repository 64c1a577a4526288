#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "hgf/network.hpp"
#include "hgf/presets.hpp"
#include "hgf/rng.hpp"
#include "hgf/task.hpp"

using namespace hgf;

namespace {

Network chain3() {
  Network net = new_network();
  net = add_node(std::move(net), NodeKind::Binary);
  net = add_node(std::move(net), NodeKind::Continuous);
  net = add_node(std::move(net), NodeKind::Continuous);
  net = add_edge(std::move(net), 0, 1, Coupling::Value, 1.0);
  net = add_edge(std::move(net), 1, 2, Coupling::Volatility, 1.0);
  return net;
}

int position(const UpdateSequence& seq, int node, const std::string& fn) {
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    if (seq.steps[i].node == node && seq.steps[i].function == fn) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("graph construction enforces structure") {
  Network net = chain3();
  check_invariants(net);
  CHECK(net.size() == 3);
  CHECK(net.edges.parents(0, Coupling::Value) == std::vector<int>{1});
  CHECK(net.edges.children(1, Coupling::Value) == std::vector<int>{0});
  CHECK(net.edges.parents(1, Coupling::Volatility) == std::vector<int>{2});

  CHECK_THROWS_AS(add_edge(chain3(), 0, 0, Coupling::Value, 1.0), CycleError);
  CHECK_THROWS_AS(add_edge(chain3(), 0, 1, Coupling::Value, 1.0),
                  DuplicateEdgeError);
  CHECK_THROWS_AS(add_edge(chain3(), 0, 5, Coupling::Value, 1.0), IndexError);
  CHECK_THROWS_AS(add_edge(chain3(), 0, 1, Coupling::Volatility, -1.0),
                  InvalidAttributeError);
  CHECK_THROWS_AS(add_edge(chain3(), 0, 1, Coupling::Volatility, 0.0),
                  InvalidAttributeError);
  // 2 -> 0 closes a directed cycle over the union of coupling types.
  CHECK_THROWS_AS(add_edge(chain3(), 2, 0, Coupling::Value, 1.0), CycleError);
  CHECK_THROWS_AS(add_edge(chain3(), 2, 0, Coupling::Volatility, 1.0),
                  CycleError);
}

TEST_CASE("add_node validates attributes") {
  NodeAttributes bad;
  bad.precision = -1.0;
  CHECK_THROWS_AS(add_node(new_network(), NodeKind::Continuous, bad),
                  InvalidAttributeError);
  NodeAttributes coupled;
  coupled.value_coupling.push_back(1.0);
  CHECK_THROWS_AS(add_node(new_network(), NodeKind::Continuous, coupled),
                  InvalidAttributeError);
}

TEST_CASE("remove_node densely remaps indices, edges and sequence") {
  Network net = chain3();
  net.sequence = derive_update_sequence(net);
  std::vector<int> old_to_new;
  net = remove_node(std::move(net), 1, &old_to_new);
  check_invariants(net);

  CHECK(old_to_new == std::vector<int>{0, -1, 1});
  CHECK(net.size() == 2);
  CHECK(net.kinds[0] == NodeKind::Binary);
  CHECK(net.kinds[1] == NodeKind::Continuous);
  // Both edges touched node 1, so nothing survives.
  CHECK(net.edges.parents(0, Coupling::Value).empty());
  CHECK(net.edges.children(1, Coupling::Volatility).empty());
  CHECK(net.attributes[0].value_coupling.empty());
  for (const Step& s : net.sequence.steps) CHECK(s.node != -1);
}

TEST_CASE("set_edges replaces a parent set wholesale") {
  Network net = new_network();
  for (int i = 0; i < 4; ++i) {
    net = add_node(std::move(net), NodeKind::Continuous);
  }
  net = set_edges(std::move(net), 0, Coupling::Value, {1, 2}, {0.5, 2.0});
  check_invariants(net);
  CHECK(net.attributes[0].value_coupling == std::vector<double>{0.5, 2.0});

  net = set_edges(std::move(net), 0, Coupling::Value, {3});
  check_invariants(net);
  CHECK(net.edges.children(1, Coupling::Value).empty());
  CHECK(net.edges.children(2, Coupling::Value).empty());
  CHECK(net.attributes[0].value_coupling == std::vector<double>{1.0});

  CHECK_THROWS_AS(
      set_edges(chain3(), 0, Coupling::Value, {1, 2}, {1.0}), AlignmentError);
  CHECK_THROWS_AS(set_edges(chain3(), 2, Coupling::Value, {0}), CycleError);
}

TEST_CASE("attribute paths round-trip and validate") {
  Network net = chain3();
  set_attribute(net, "node.1.tonic_volatility", -2.5);
  CHECK(get_attribute(net, "node.1.tonic_volatility") == -2.5);
  set_attribute(net, "node.0.value_coupling.0", 0.0);  // frozen coupling
  CHECK(get_attribute(net, "node.0.value_coupling.0") == 0.0);
  set_attribute(net, "node.2.extra.drift", 0.25);
  CHECK(get_attribute(net, "node.2.extra.drift") == 0.25);

  CHECK_THROWS_AS(set_attribute(net, "node.1.precision", -1.0),
                  InvalidAttributeError);
  CHECK_THROWS_AS(set_attribute(net, "node.1.wibble", 1.0),
                  InvalidAttributeError);
  CHECK_THROWS_AS(set_attribute(net, "node.9.mean", 1.0), IndexError);
  CHECK_THROWS_AS(get_attribute(net, "node.0.value_coupling.3"), IndexError);
  CHECK_THROWS_AS(set_attribute(net, "response.inverse_temperature", 1.0),
                  InvalidAttributeError);
}

TEST_CASE("derived sequences schedule parents before children and updates in "
          "reverse") {
  // 1000 random DAGs: nodes 2..20, random edges from lower to higher index.
  Rng rng(20240817);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 19.0);
    Network net = new_network();
    for (int i = 0; i < n; ++i) {
      net = add_node(std::move(net), NodeKind::Continuous);
    }
    for (int child = 0; child < n; ++child) {
      for (int parent = child + 1; parent < n; ++parent) {
        const double roll = rng.uniform();
        if (roll < 0.12) {
          net = add_edge(std::move(net), child, parent, Coupling::Value,
                         0.25 + rng.uniform());
        } else if (roll < 0.24) {
          net = add_edge(std::move(net), child, parent, Coupling::Volatility,
                         0.25 + rng.uniform());
        }
      }
    }
    const UpdateSequence seq = derive_update_sequence(net);
    CHECK(seq == derive_update_sequence(net));  // deterministic

    std::map<std::string, int> count;
    for (const Step& s : seq.steps) ++count[s.function];
    CHECK(count["prediction"] == n);

    for (int node = 0; node < n; ++node) {
      const bool has_parent = !net.edges.all_parents(node).empty();
      const bool has_child = !net.edges.all_children(node).empty();
      CHECK((position(seq, node, "prediction_error") >= 0) == has_parent);
      CHECK((position(seq, node, "posterior_update") >= 0) == has_child);
      if (has_parent && has_child) {
        // A node's own posterior lands before it reports its error upward.
        CHECK(position(seq, node, "posterior_update") <
              position(seq, node, "prediction_error"));
      }
      for (Coupling type : {Coupling::Value, Coupling::Volatility}) {
        for (int parent : net.edges.parents(node, type)) {
          CHECK(position(seq, parent, "prediction") <
                position(seq, node, "prediction"));
          CHECK(position(seq, node, "prediction_error") <
                position(seq, parent, "posterior_update"));
        }
      }
    }
    net.sequence = seq;
    check_invariants(net);
  }
}

TEST_CASE("origin-restricted sequences cover the ancestor closure only") {
  Network net = new_network();
  // Two chains sharing nothing: 0 <- 1 and 2 <- 3.
  for (int i = 0; i < 4; ++i) {
    net = add_node(std::move(net), NodeKind::Continuous);
  }
  net = add_edge(std::move(net), 0, 1, Coupling::Volatility, 1.0);
  net = add_edge(std::move(net), 2, 3, Coupling::Volatility, 1.0);
  const UpdateSequence seq = derive_update_sequence(net, 0);
  std::set<int> touched;
  for (const Step& s : seq.steps) touched.insert(s.node);
  CHECK(touched == std::set<int>{0, 1});
}

TEST_CASE("invariant checking flags corrupted reciprocity") {
  Network net = chain3();
  net.edges.parents(0, Coupling::Volatility).push_back(2);
  CHECK_THROWS_AS(check_invariants(net), ValidationError);
}

TEST_CASE("propagation is deterministic and rows are validated") {
  Network net = preset("binary-3");
  const std::vector<double> u = switching_task(120, 7);
  InputSeries series = series_from_column(u, 0);

  const RunResult a = run(net, series);
  const RunResult b = run(net, series);
  // Surprise traces carry NaN for unobserved nodes, so compare bit patterns.
  const auto same_bits = [](const std::vector<double>& x,
                            const std::vector<double>& y) {
    return x.size() == y.size() &&
           std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
  };
  for (int k = 0; k < a.trajectory.node_count(); ++k) {
    CHECK(same_bits(a.trajectory.nodes[k].mean, b.trajectory.nodes[k].mean));
    CHECK(same_bits(a.trajectory.nodes[k].precision,
                    b.trajectory.nodes[k].precision));
    CHECK(same_bits(a.trajectory.nodes[k].surprise,
                    b.trajectory.nodes[k].surprise));
  }
  CHECK(a.trajectory.steps() == 120);
  CHECK(a.trajectory.time.front() == 1.0);
  CHECK(a.trajectory.time.back() == 120.0);

  InputSeries bad = series;
  bad.observations[0].second[3] = 0.5;  // binary node
  CHECK_THROWS_AS(run(net, bad), ValidationError);

  InputSeries empty;
  CHECK_THROWS_AS(run(net, empty), ValidationError);

  InputSeries shrunk = series;
  shrunk.time = {1.0, 2.0};
  CHECK_THROWS_AS(run(net, shrunk), AlignmentError);
}

TEST_CASE("missing observations leave posteriors untouched") {
  Network net = preset("binary-3");
  InputSeries series;
  series.observations.emplace_back(
      0, std::vector<double>(5, std::numeric_limits<double>::quiet_NaN()));
  const RunResult result = run(net, series);
  const NodeTrace& level2 = result.trajectory.nodes[1];
  for (long s = 0; s < 5; ++s) {
    CHECK(level2.mean[s] == 0.0);
    CHECK(level2.precision[s] == 1.0);
    CHECK(std::isnan(result.trajectory.nodes[0].surprise[s]));
  }
  // Expectations still dilute with the passage of time.
  CHECK(level2.expected_precision[4] < 1.0);
}

TEST_CASE("dt scales the volatility accumulated between observations") {
  Network net = preset("continuous-2");
  InputSeries slow;
  slow.time = {2.0, 4.0};
  slow.observations.emplace_back(0, std::vector<double>{0.5, 0.25});
  InputSeries fast;
  fast.time = {1.0, 2.0};
  fast.observations.emplace_back(0, std::vector<double>{0.5, 0.25});
  const RunResult a = run(net, slow);
  const RunResult b = run(net, fast);
  // dt = 2 doubles the predicted step variance, so the first prediction is
  // strictly less confident than under dt = 1.
  CHECK(a.trajectory.nodes[0].expected_precision[0] <
        b.trajectory.nodes[0].expected_precision[0]);
  CHECK(a.trajectory.dt == std::vector<double>{2.0, 2.0});
}

TEST_CASE("presets expose the documented shapes") {
  const Network b2 = preset("binary-2");
  CHECK(b2.size() == 2);
  CHECK(b2.kinds[0] == NodeKind::Binary);
  CHECK(b2.attributes[0].mean == 0.5);
  const Network c3 = preset("continuous-3");
  CHECK(c3.size() == 3);
  CHECK(c3.kinds == std::vector<NodeKind>(3, NodeKind::Continuous));
  CHECK_THROWS_AS(preset("binary-9"), ValidationError);

  PresetSpec spec;
  spec.family = PresetSpec::Family::Binary;
  spec.levels = 3;
  spec.coupling = {1.0, 0.0};  // frozen top level
  const Network frozen = preset(spec);
  CHECK(get_attribute(frozen, "node.1.volatility_coupling.0") == 0.0);
  check_invariants(frozen);
}
