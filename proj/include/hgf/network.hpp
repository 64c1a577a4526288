#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgf/errors.hpp"

namespace hgf {

enum class NodeKind { Continuous, Binary };

// Coupling types double as adjacency-list dimensions. Value couplings relate
// a node's level to its parents; volatility couplings modulate the node's
// step variance through its parents.
enum class Coupling { Value, Volatility };
inline constexpr int kCouplingCount = 2;

const char* to_string(NodeKind k);
const char* to_string(Coupling c);

// Per-step transient state. Cleared at the start of every propagation step;
// update functions communicate through it, and anything here is readable by
// user-supplied update functions between steps of the same propagation.
struct StepState {
  bool predicted = false;
  bool observed = false;
  bool updated = false;
  bool has_value_pe = false;
  bool has_volatility_pe = false;
  bool has_surprise = false;
  double value_pe = 0.0;
  double volatility_pe = 0.0;
  // Expected precision captured when the prediction error was emitted.
  double expected_precision_at_pe = 0.0;
  // dt-scaled predicted step variance exp(omega + sum kappa*mu_hat_parent).
  double predicted_volatility = 0.0;
  double surprise = 0.0;
};

struct NodeAttributes {
  double mean = 0.0;
  double precision = 1.0;
  double expected_mean = 0.0;
  double expected_precision = 1.0;
  double tonic_volatility = -3.0;
  // Aligned with the node's parent lists of the same coupling type.
  std::vector<double> value_coupling;
  std::vector<double> volatility_coupling;
  // Pending observation for the current step; consumed by propagate.
  std::optional<double> observation;
  StepState step;
  // Open-ended named attributes. Recognized keys: "drift",
  // "autoregression_strength", "autoregression_target",
  // "observation_precision". Ordered map so iteration order is stable.
  std::map<std::string, double> extra;
};

double extra_or(const NodeAttributes& a, const std::string& key, double fallback);

// Directed edges child -> parent, kept per coupling type with reciprocal
// child lists. The structure admits any number of coupling types; this
// library instantiates the two above.
class AdjacencyList {
 public:
  struct PerType {
    std::vector<int> parents;
    std::vector<int> children;
  };

  int size() const { return static_cast<int>(nodes_.size()); }
  void push_node() { nodes_.emplace_back(); }

  const std::vector<int>& parents(int node, Coupling c) const {
    return at(node, c).parents;
  }
  const std::vector<int>& children(int node, Coupling c) const {
    return at(node, c).children;
  }
  std::vector<int>& parents(int node, Coupling c) { return at(node, c).parents; }
  std::vector<int>& children(int node, Coupling c) { return at(node, c).children; }

  // Union over coupling types, deduplicated, ascending.
  std::vector<int> all_parents(int node) const;
  std::vector<int> all_children(int node) const;

 private:
  struct NodeEdges {
    PerType by_type[kCouplingCount];
  };
  const PerType& at(int node, Coupling c) const {
    return nodes_[static_cast<std::size_t>(node)].by_type[static_cast<int>(c)];
  }
  PerType& at(int node, Coupling c) {
    return nodes_[static_cast<std::size_t>(node)].by_type[static_cast<int>(c)];
  }
  std::vector<NodeEdges> nodes_;
};

struct Network;

enum class Phase { Prediction, Update };

// Update functions take the network by value and return the updated network;
// "in place" refers to the node they write, not to mutation through a
// reference. This keeps propagation a pure function of (network, inputs).
using UpdateFunction = std::function<Network(Network, int)>;

struct UpdateEntry {
  UpdateFunction fn;
  Phase phase = Phase::Update;
};

struct Step {
  int node = 0;
  std::string function;
  bool operator==(const Step&) const = default;
};

struct UpdateSequence {
  std::vector<Step> steps;
  bool operator==(const UpdateSequence&) const = default;
};

struct Network {
  std::vector<NodeKind> kinds;
  std::vector<NodeAttributes> attributes;
  AdjacencyList edges;
  // Named update functions; the sequence refers into this registry.
  std::map<std::string, UpdateEntry> functions;
  UpdateSequence sequence;
  // Time step handed to the current propagation; visible to update functions.
  double current_dt = 1.0;
  // Count of completed propagation steps, used in error reports.
  long step_count = 0;

  int size() const { return static_cast<int>(kinds.size()); }
};

// --- construction and mutation ----------------------------------------------

// Empty network with the standard update-function registry installed
// ("prediction", "prediction_error", "posterior_update").
Network new_network();

// Appends a node; returns the updated network. attrs must carry empty
// coupling lists (couplings are created by add_edge) and positive precisions.
Network add_node(Network net, NodeKind kind, NodeAttributes attrs = {});

// Inserts a child -> parent edge of the given coupling type with a positive
// strength, appending the strength to the child's coupling list. Rejects
// self-loops, duplicates and anything that would close a directed cycle over
// the union of coupling types.
Network add_edge(Network net, int child, int parent, Coupling type,
                 double strength);

// Removes a node; remaining indices are densely remapped (old index i > idx
// becomes i - 1). Edges touching idx disappear, as do its sequence steps.
// When old_to_new is given it receives a size()-long map with -1 at idx.
Network remove_node(Network net, int idx, std::vector<int>* old_to_new = nullptr);

// Replaces child's parent set for one coupling type wholesale. strengths must
// be empty (all 1.0) or match parents in length. Reciprocal child lists are
// kept consistent; cycle checks run on the resulting graph.
Network set_edges(Network net, int child, Coupling type,
                  const std::vector<int>& parents,
                  const std::vector<double>& strengths = {});

// Throws if any structural invariant is broken (index ranges, reciprocal
// edge consistency, coupling-list lengths, acyclicity, sequence references).
void check_invariants(const Network& net);

// Dotted attribute paths: "node.<i>.mean", "node.<i>.precision",
// "node.<i>.expected_mean", "node.<i>.expected_precision",
// "node.<i>.tonic_volatility", "node.<i>.value_coupling.<j>",
// "node.<i>.volatility_coupling.<j>", "node.<i>.extra.<key>". Writes
// validate ranges (precisions positive, couplings non-negative); unknown
// paths raise InvalidAttributeError, bad indices IndexError.
void set_attribute(Network& net, const std::string& path, double value);
double get_attribute(const Network& net, const std::string& path);

// --- scheduling --------------------------------------------------------------

// Two-phase schedule: predictions from the ancestors down (parents before
// children), then interleaved prediction errors and posterior updates walking
// back up. With origin set, restricts to origin plus its ancestor closure.
// Ties break on the lower node index, so the result is unique.
UpdateSequence derive_update_sequence(const Network& net,
                                      std::optional<int> origin = std::nullopt);

// --- propagation -------------------------------------------------------------

// Advances the network one time step: runs the leading prediction-phase steps
// of the sequence, applies the observations (keyed by node index), then runs
// the remaining steps. Observed binary values must be exactly 0 or 1. Nodes
// without observations below them keep their posteriors unchanged.
Network propagate(Network net, const std::map<int, double>& observations,
                  double dt);

// --- batch input and recorded output ----------------------------------------

struct InputSeries {
  // Observation times; empty means dt = 1 per row. Must be strictly
  // increasing and start above 0.
  std::vector<double> time;
  // Per-target observation columns (NaN = missing at that row). All columns
  // must share one length.
  std::vector<std::pair<int, std::vector<double>>> observations;
  // Optional recorded actions aligned with rows (-1 = missing).
  std::vector<int> actions;

  long rows() const {
    return observations.empty()
               ? static_cast<long>(time.size())
               : static_cast<long>(observations.front().second.size());
  }
};

struct NodeTrace {
  std::vector<double> mean;
  std::vector<double> precision;
  std::vector<double> expected_mean;
  std::vector<double> expected_precision;
  // NaN where the node was not observed / no surprise was produced.
  std::vector<double> observation;
  std::vector<double> surprise;
};

struct Trajectory {
  std::vector<NodeKind> kinds;
  std::vector<NodeTrace> nodes;
  std::vector<double> time;
  std::vector<double> dt;

  long steps() const { return static_cast<long>(time.size()); }
  int node_count() const { return static_cast<int>(nodes.size()); }
};

struct RunResult {
  Network network;
  Trajectory trajectory;
};

// Runs the full series through propagate, recording every node's state after
// each step. Errors carry the offending row. An empty series is an error.
RunResult run(Network net, const InputSeries& series);

}  // namespace hgf
