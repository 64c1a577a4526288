#include "hgf/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "hgf/updates.hpp"

namespace hgf {

const char* to_string(NodeKind k) {
  return k == NodeKind::Binary ? "binary" : "continuous";
}

const char* to_string(Coupling c) {
  return c == Coupling::Value ? "value" : "volatility";
}

double extra_or(const NodeAttributes& a, const std::string& key, double fallback) {
  auto it = a.extra.find(key);
  return it == a.extra.end() ? fallback : it->second;
}

namespace {

std::vector<int> merged_unique(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void require_index(const Network& net, int idx, const char* what) {
  if (idx < 0 || idx >= net.size()) {
    throw IndexError(std::string(what) + " index " + std::to_string(idx) +
                     " out of range for network of size " +
                     std::to_string(net.size()));
  }
}

// True when `target` lies in the ancestor closure of `start` (parent links,
// both coupling types).
bool reaches_ancestor(const AdjacencyList& edges, int start, int target) {
  std::vector<int> stack = {start};
  std::vector<char> seen(static_cast<std::size_t>(edges.size()), 0);
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (node == target) return true;
    for (int p : edges.all_parents(node)) {
      if (!seen[static_cast<std::size_t>(p)]) {
        seen[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }
  return false;
}

// Kahn's algorithm over the union graph; false when edges close a cycle.
bool is_acyclic(const AdjacencyList& edges) {
  const int n = edges.size();
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    indegree[static_cast<std::size_t>(i)] =
        static_cast<int>(edges.all_parents(i).size());
  }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  }
  int emitted = 0;
  while (!ready.empty()) {
    int node = ready.back();
    ready.pop_back();
    ++emitted;
    for (int c : edges.all_children(node)) {
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
    }
  }
  return emitted == n;
}

}  // namespace

std::vector<int> AdjacencyList::all_parents(int node) const {
  return merged_unique(parents(node, Coupling::Value),
                       parents(node, Coupling::Volatility));
}

std::vector<int> AdjacencyList::all_children(int node) const {
  return merged_unique(children(node, Coupling::Value),
                       children(node, Coupling::Volatility));
}

Network new_network() {
  Network net;
  install_standard_functions(net);
  return net;
}

Network add_node(Network net, NodeKind kind, NodeAttributes attrs) {
  if (!attrs.value_coupling.empty() || !attrs.volatility_coupling.empty()) {
    throw InvalidAttributeError(
        "a new node must have empty coupling lists; couplings are created by "
        "add_edge");
  }
  if (!(std::isfinite(attrs.precision) && attrs.precision > 0.0) ||
      !(std::isfinite(attrs.expected_precision) && attrs.expected_precision > 0.0)) {
    throw InvalidAttributeError("node precisions must be positive and finite");
  }
  if (!std::isfinite(attrs.mean) || !std::isfinite(attrs.expected_mean) ||
      !std::isfinite(attrs.tonic_volatility)) {
    throw InvalidAttributeError("node attributes must be finite");
  }
  net.kinds.push_back(kind);
  net.attributes.push_back(std::move(attrs));
  net.edges.push_node();
  return net;
}

Network add_edge(Network net, int child, int parent, Coupling type,
                 double strength) {
  require_index(net, child, "child");
  require_index(net, parent, "parent");
  if (child == parent) throw CycleError("self-coupling is not allowed");
  if (!(std::isfinite(strength) && strength > 0.0)) {
    throw InvalidAttributeError("coupling strength must be positive and finite");
  }
  auto& parents = net.edges.parents(child, type);
  if (std::find(parents.begin(), parents.end(), parent) != parents.end()) {
    throw DuplicateEdgeError("edge " + std::to_string(child) + " -> " +
                             std::to_string(parent) + " (" + to_string(type) +
                             ") already exists");
  }
  // A cycle closes exactly when the new child is already an ancestor of the
  // new parent through either coupling type.
  if (reaches_ancestor(net.edges, parent, child)) {
    throw CycleError("edge " + std::to_string(child) + " -> " +
                     std::to_string(parent) + " would close a cycle");
  }
  parents.push_back(parent);
  net.edges.children(parent, type).push_back(child);
  auto& coupling = type == Coupling::Value
                       ? net.attributes[static_cast<std::size_t>(child)].value_coupling
                       : net.attributes[static_cast<std::size_t>(child)].volatility_coupling;
  coupling.push_back(strength);
  return net;
}

Network remove_node(Network net, int idx, std::vector<int>* old_to_new) {
  require_index(net, idx, "node");
  const int n = net.size();
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (int i = 0, next = 0; i < n; ++i) {
    if (i != idx) remap[static_cast<std::size_t>(i)] = next++;
  }

  Network out;
  out.functions = std::move(net.functions);
  out.current_dt = net.current_dt;
  out.step_count = net.step_count;
  out.kinds.reserve(static_cast<std::size_t>(n) - 1);
  out.attributes.reserve(static_cast<std::size_t>(n) - 1);
  for (int i = 0; i < n; ++i) {
    if (i == idx) continue;
    out.kinds.push_back(net.kinds[static_cast<std::size_t>(i)]);
    NodeAttributes attrs = std::move(net.attributes[static_cast<std::size_t>(i)]);
    // Coupling entries are aligned with the parent lists; drop the ones that
    // pointed at the removed node.
    for (Coupling type : {Coupling::Value, Coupling::Volatility}) {
      const auto& parents = net.edges.parents(i, type);
      auto& coupling = type == Coupling::Value ? attrs.value_coupling
                                               : attrs.volatility_coupling;
      std::vector<double> kept;
      kept.reserve(coupling.size());
      for (std::size_t j = 0; j < parents.size(); ++j) {
        if (parents[j] != idx) kept.push_back(coupling[j]);
      }
      coupling = std::move(kept);
    }
    out.attributes.push_back(std::move(attrs));
    out.edges.push_node();
  }
  for (int i = 0; i < n; ++i) {
    if (i == idx) continue;
    const int ni = remap[static_cast<std::size_t>(i)];
    for (Coupling type : {Coupling::Value, Coupling::Volatility}) {
      for (int p : net.edges.parents(i, type)) {
        if (p != idx) {
          out.edges.parents(ni, type).push_back(remap[static_cast<std::size_t>(p)]);
        }
      }
      for (int c : net.edges.children(i, type)) {
        if (c != idx) {
          out.edges.children(ni, type).push_back(remap[static_cast<std::size_t>(c)]);
        }
      }
    }
  }
  for (const Step& s : net.sequence.steps) {
    if (s.node == idx) continue;
    out.sequence.steps.push_back(
        Step{remap[static_cast<std::size_t>(s.node)], s.function});
  }
  if (old_to_new) *old_to_new = std::move(remap);
  return out;
}

Network set_edges(Network net, int child, Coupling type,
                  const std::vector<int>& parents,
                  const std::vector<double>& strengths) {
  require_index(net, child, "child");
  for (int p : parents) {
    require_index(net, p, "parent");
    if (p == child) throw CycleError("self-coupling is not allowed");
  }
  {
    std::vector<int> sorted = parents;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DuplicateEdgeError("repeated parent in replacement set");
    }
  }
  if (!strengths.empty() && strengths.size() != parents.size()) {
    throw AlignmentError("strengths must be empty or match parents in length");
  }
  for (double s : strengths) {
    if (!(std::isfinite(s) && s > 0.0)) {
      throw InvalidAttributeError("coupling strength must be positive and finite");
    }
  }

  for (int old_parent : net.edges.parents(child, type)) {
    auto& siblings = net.edges.children(old_parent, type);
    siblings.erase(std::remove(siblings.begin(), siblings.end(), child),
                   siblings.end());
  }
  net.edges.parents(child, type) = parents;
  for (int p : parents) net.edges.children(p, type).push_back(child);
  auto& coupling = type == Coupling::Value
                       ? net.attributes[static_cast<std::size_t>(child)].value_coupling
                       : net.attributes[static_cast<std::size_t>(child)].volatility_coupling;
  coupling = strengths.empty() ? std::vector<double>(parents.size(), 1.0)
                               : strengths;
  if (!is_acyclic(net.edges)) {
    throw CycleError("replacement parent set closes a cycle");
  }
  return net;
}

void check_invariants(const Network& net) {
  const int n = net.size();
  if (static_cast<int>(net.attributes.size()) != n ||
      net.edges.size() != n) {
    throw ValidationError("kinds, attributes and edges disagree on size");
  }
  for (int i = 0; i < n; ++i) {
    const auto& a = net.attributes[static_cast<std::size_t>(i)];
    if (!(a.precision > 0.0) || !(a.expected_precision > 0.0) ||
        !std::isfinite(a.precision) || !std::isfinite(a.expected_precision)) {
      throw InvalidAttributeError("node " + std::to_string(i) +
                                  " has a non-positive precision");
    }
    for (Coupling type : {Coupling::Value, Coupling::Volatility}) {
      const auto& parents = net.edges.parents(i, type);
      const auto& coupling = type == Coupling::Value ? a.value_coupling
                                                     : a.volatility_coupling;
      if (parents.size() != coupling.size()) {
        throw ValidationError("node " + std::to_string(i) + " " +
                              to_string(type) +
                              " coupling list does not match its parents");
      }
      for (double s : coupling) {
        if (!std::isfinite(s) || s < 0.0) {
          throw InvalidAttributeError("node " + std::to_string(i) +
                                      " has a negative coupling strength");
        }
      }
      std::vector<int> seen;
      for (int p : parents) {
        if (p < 0 || p >= n || p == i) {
          throw ValidationError("node " + std::to_string(i) +
                                " has an invalid parent index");
        }
        if (std::find(seen.begin(), seen.end(), p) != seen.end()) {
          throw DuplicateEdgeError("node " + std::to_string(i) +
                                   " lists a parent twice");
        }
        seen.push_back(p);
        const auto& back = net.edges.children(p, type);
        if (std::count(back.begin(), back.end(), i) != 1) {
          throw ValidationError("edge " + std::to_string(i) + " -> " +
                                std::to_string(p) +
                                " is missing its reciprocal child entry");
        }
      }
      for (int c : net.edges.children(i, type)) {
        if (c < 0 || c >= n || c == i) {
          throw ValidationError("node " + std::to_string(i) +
                                " has an invalid child index");
        }
        const auto& fwd = net.edges.parents(c, type);
        if (std::count(fwd.begin(), fwd.end(), i) != 1) {
          throw ValidationError("edge " + std::to_string(c) + " -> " +
                                std::to_string(i) +
                                " is missing its parent entry");
        }
      }
    }
  }
  if (!is_acyclic(net.edges)) throw CycleError("edge structure contains a cycle");
  for (const Step& s : net.sequence.steps) {
    if (s.node < 0 || s.node >= n) {
      throw ValidationError("sequence step targets node " +
                            std::to_string(s.node) + " which does not exist");
    }
    if (net.functions.find(s.function) == net.functions.end()) {
      throw ValidationError("sequence step references unregistered function '" +
                            s.function + "'");
    }
  }
}

UpdateSequence derive_update_sequence(const Network& net,
                                      std::optional<int> origin) {
  const int n = net.size();
  if (n == 0) throw ValidationError("cannot derive a sequence for an empty network");

  std::vector<char> member(static_cast<std::size_t>(n), 1);
  if (origin) {
    require_index(net, *origin, "origin");
    std::fill(member.begin(), member.end(), 0);
    std::vector<int> stack = {*origin};
    member[static_cast<std::size_t>(*origin)] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int p : net.edges.all_parents(node)) {
        if (!member[static_cast<std::size_t>(p)]) {
          member[static_cast<std::size_t>(p)] = 1;
          stack.push_back(p);
        }
      }
    }
  }

  // Prediction pass: ancestors before descendants, lowest index first among
  // the ready set so the result is unique.
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  long members = 0;
  for (int i = 0; i < n; ++i) {
    if (!member[static_cast<std::size_t>(i)]) continue;
    ++members;
    for (int p : net.edges.all_parents(i)) {
      if (member[static_cast<std::size_t>(p)]) {
        ++indegree[static_cast<std::size_t>(i)];
      }
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < n; ++i) {
    if (member[static_cast<std::size_t>(i)] &&
        indegree[static_cast<std::size_t>(i)] == 0) {
      ready.push(i);
    }
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(members));
  while (!ready.empty()) {
    int node = ready.top();
    ready.pop();
    order.push_back(node);
    for (int c : net.edges.all_children(node)) {
      if (member[static_cast<std::size_t>(c)] &&
          --indegree[static_cast<std::size_t>(c)] == 0) {
        ready.push(c);
      }
    }
  }
  if (static_cast<long>(order.size()) != members) {
    throw CycleError("edge structure contains a cycle");
  }

  UpdateSequence seq;
  for (int node : order) seq.steps.push_back(Step{node, "prediction"});
  // Update pass walks back up: each node settles its posterior from child
  // prediction errors, then emits its own toward its parents.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int node = *it;
    bool has_children = false;
    bool has_parents = false;
    for (int c : net.edges.all_children(node)) {
      has_children = has_children || member[static_cast<std::size_t>(c)];
    }
    for (int p : net.edges.all_parents(node)) {
      has_parents = has_parents || member[static_cast<std::size_t>(p)];
    }
    if (has_children) seq.steps.push_back(Step{node, "posterior_update"});
    if (has_parents) seq.steps.push_back(Step{node, "prediction_error"});
  }
  return seq;
}

namespace {

void apply_observation(Network& net, int node) {
  NodeAttributes& a = net.attributes[static_cast<std::size_t>(node)];
  const double u = *a.observation;
  if (!a.step.predicted) {
    throw SequencingError("node " + std::to_string(node) +
                          " received an observation before its prediction "
                          "(step " + std::to_string(net.step_count) + ")");
  }
  if (net.kinds[static_cast<std::size_t>(node)] == NodeKind::Binary) {
    if (u != 0.0 && u != 1.0) {
      throw ValidationError("binary observation must be exactly 0 or 1, got " +
                            std::to_string(u) + " (node " +
                            std::to_string(node) + ", step " +
                            std::to_string(net.step_count) + ")");
    }
    double s;
    try {
      s = binary_surprise(a.expected_mean, u);
    } catch (const DomainError&) {
      throw NumericalError("infinite surprise: expectation pinned against the observation",
                           node, net.step_count);
    }
    // The observation enters exactly; the stored precision stays the finite
    // Bernoulli predictive precision (nothing downstream consumes it).
    a.mean = u;
    a.precision = a.expected_precision;
    a.step.surprise = s;
  } else {
    const double obs_precision = extra_or(a, "observation_precision", 1.0);
    if (!(std::isfinite(obs_precision) && obs_precision > 0.0)) {
      throw InvalidAttributeError("observation_precision must be positive (node " +
                                  std::to_string(node) + ")");
    }
    const double pi_hat = a.expected_precision;
    const double posterior_precision = pi_hat + obs_precision;
    const double posterior_mean =
        a.expected_mean + (obs_precision / posterior_precision) * (u - a.expected_mean);
    if (!std::isfinite(posterior_precision) || !std::isfinite(posterior_mean)) {
      throw NumericalError("non-finite measurement update", node, net.step_count);
    }
    a.step.surprise =
        gaussian_surprise(a.expected_mean, 1.0 / pi_hat + 1.0 / obs_precision, u);
    a.mean = posterior_mean;
    a.precision = posterior_precision;
  }
  a.step.observed = true;
  a.step.updated = true;
  a.step.has_surprise = true;
}

}  // namespace

Network propagate(Network net, const std::map<int, double>& observations,
                  double dt) {
  if (net.sequence.steps.empty()) {
    throw SequencingError("cannot propagate an empty update sequence");
  }
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw ValidationError("time step must be positive and finite (step " +
                          std::to_string(net.step_count) + ")");
  }
  const int n = net.size();
  struct Resolved {
    UpdateFunction fn;
    int node;
    Phase phase;
  };
  std::vector<Resolved> steps;
  steps.reserve(net.sequence.steps.size());
  for (const Step& s : net.sequence.steps) {
    if (s.node < 0 || s.node >= n) {
      throw IndexError("sequence step node " + std::to_string(s.node) +
                       " out of range");
    }
    auto it = net.functions.find(s.function);
    if (it == net.functions.end()) {
      throw SequencingError("sequence references unregistered function '" +
                            s.function + "'");
    }
    steps.push_back(Resolved{it->second.fn, s.node, it->second.phase});
  }

  for (NodeAttributes& a : net.attributes) {
    a.step = StepState{};
    a.observation.reset();
  }
  net.current_dt = dt;
  for (const auto& [node, value] : observations) {
    if (node < 0 || node >= n) {
      throw IndexError("observation targets node " + std::to_string(node) +
                       " which does not exist");
    }
    if (std::isnan(value)) continue;  // missing
    net.attributes[static_cast<std::size_t>(node)].observation = value;
  }

  std::size_t split = 0;
  while (split < steps.size() && steps[split].phase == Phase::Prediction) ++split;
  for (std::size_t i = 0; i < split; ++i) {
    net = steps[i].fn(std::move(net), steps[i].node);
  }
  for (int i = 0; i < n; ++i) {
    if (net.attributes[static_cast<std::size_t>(i)].observation) {
      apply_observation(net, i);
    }
  }
  for (std::size_t i = split; i < steps.size(); ++i) {
    net = steps[i].fn(std::move(net), steps[i].node);
  }
  ++net.step_count;
  return net;
}

RunResult run(Network net, const InputSeries& series) {
  const long rows = series.rows();
  if (rows == 0) throw ValidationError("input series is empty");
  for (const auto& [node, values] : series.observations) {
    if (static_cast<long>(values.size()) != rows) {
      throw AlignmentError("observation columns disagree on length");
    }
    (void)node;
  }
  if (!series.actions.empty() &&
      static_cast<long>(series.actions.size()) != rows) {
    throw AlignmentError("actions do not match the observation rows");
  }
  if (!series.time.empty()) {
    if (static_cast<long>(series.time.size()) != rows) {
      throw AlignmentError("time column does not match the observation rows");
    }
    double previous = 0.0;
    for (long r = 0; r < rows; ++r) {
      const double t = series.time[static_cast<std::size_t>(r)];
      if (!(std::isfinite(t) && t > previous)) {
        throw ValidationError("time column must be strictly increasing and "
                              "positive (row " + std::to_string(r + 1) + ")");
      }
      previous = t;
    }
  }

  const int n = net.size();
  Trajectory traj;
  traj.kinds = net.kinds;
  traj.nodes.resize(static_cast<std::size_t>(n));
  for (NodeTrace& trace : traj.nodes) {
    trace.mean.reserve(static_cast<std::size_t>(rows));
    trace.precision.reserve(static_cast<std::size_t>(rows));
    trace.expected_mean.reserve(static_cast<std::size_t>(rows));
    trace.expected_precision.reserve(static_cast<std::size_t>(rows));
    trace.observation.reserve(static_cast<std::size_t>(rows));
    trace.surprise.reserve(static_cast<std::size_t>(rows));
  }
  traj.time.reserve(static_cast<std::size_t>(rows));
  traj.dt.reserve(static_cast<std::size_t>(rows));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double previous_time = 0.0;
  std::map<int, double> observations;
  for (long r = 0; r < rows; ++r) {
    const double t = series.time.empty()
                         ? static_cast<double>(r + 1)
                         : series.time[static_cast<std::size_t>(r)];
    const double dt = t - previous_time;
    previous_time = t;
    observations.clear();
    for (const auto& [node, values] : series.observations) {
      observations[node] = values[static_cast<std::size_t>(r)];
    }
    net = propagate(std::move(net), observations, dt);
    traj.time.push_back(t);
    traj.dt.push_back(dt);
    for (int k = 0; k < n; ++k) {
      const NodeAttributes& a = net.attributes[static_cast<std::size_t>(k)];
      NodeTrace& trace = traj.nodes[static_cast<std::size_t>(k)];
      trace.mean.push_back(a.mean);
      trace.precision.push_back(a.precision);
      trace.expected_mean.push_back(a.expected_mean);
      trace.expected_precision.push_back(a.expected_precision);
      trace.observation.push_back(a.observation.value_or(nan));
      trace.surprise.push_back(a.step.has_surprise ? a.step.surprise : nan);
    }
  }
  return RunResult{std::move(net), std::move(traj)};
}

// --- attribute paths ---------------------------------------------------------

namespace {

int parse_index(const std::string& token, const std::string& path) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    throw InvalidAttributeError("bad index '" + token + "' in attribute path '" +
                                path + "'");
  }
  return value;
}

struct ParsedPath {
  int node = 0;
  std::string attr;
  int sub = -1;
  std::string key;
};

ParsedPath parse_attribute_path(const Network& net, const std::string& path) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t dot = path.find('.', start);
    if (dot == std::string::npos) {
      tokens.push_back(path.substr(start));
      break;
    }
    tokens.push_back(path.substr(start, dot - start));
    start = dot + 1;
  }
  if (tokens.size() < 3 || tokens[0] != "node") {
    throw InvalidAttributeError("attribute path must look like 'node.<i>.<attr>': '" +
                                path + "'");
  }
  ParsedPath parsed;
  parsed.node = parse_index(tokens[1], path);
  require_index(net, parsed.node, "node");
  parsed.attr = tokens[2];
  if (parsed.attr == "value_coupling" || parsed.attr == "volatility_coupling") {
    if (tokens.size() != 4) {
      throw InvalidAttributeError("coupling paths need a slot index: '" + path + "'");
    }
    parsed.sub = parse_index(tokens[3], path);
  } else if (parsed.attr == "extra") {
    if (tokens.size() < 4) {
      throw InvalidAttributeError("extra paths need a key: '" + path + "'");
    }
    // The key may itself contain dots.
    std::string key = tokens[3];
    for (std::size_t i = 4; i < tokens.size(); ++i) key += "." + tokens[i];
    parsed.key = std::move(key);
  } else if (tokens.size() != 3) {
    throw InvalidAttributeError("unexpected trailing path segments: '" + path + "'");
  }
  return parsed;
}

}  // namespace

void set_attribute(Network& net, const std::string& path, double value) {
  ParsedPath p = parse_attribute_path(net, path);
  NodeAttributes& a = net.attributes[static_cast<std::size_t>(p.node)];
  if (!std::isfinite(value)) {
    throw InvalidAttributeError("attribute values must be finite: '" + path + "'");
  }
  if (p.attr == "mean") {
    a.mean = value;
  } else if (p.attr == "expected_mean") {
    a.expected_mean = value;
  } else if (p.attr == "precision") {
    if (!(value > 0.0)) throw InvalidAttributeError("precision must be positive");
    a.precision = value;
  } else if (p.attr == "expected_precision") {
    if (!(value > 0.0)) throw InvalidAttributeError("precision must be positive");
    a.expected_precision = value;
  } else if (p.attr == "tonic_volatility") {
    a.tonic_volatility = value;
  } else if (p.attr == "value_coupling" || p.attr == "volatility_coupling") {
    auto& coupling = p.attr == "value_coupling" ? a.value_coupling
                                                : a.volatility_coupling;
    if (p.sub >= static_cast<int>(coupling.size())) {
      throw IndexError("coupling slot " + std::to_string(p.sub) +
                       " does not exist at '" + path + "'");
    }
    // Strength 0 is allowed here (a frozen coupling); negatives are not.
    if (value < 0.0) {
      throw InvalidAttributeError("coupling strength must be non-negative");
    }
    coupling[static_cast<std::size_t>(p.sub)] = value;
  } else if (p.attr == "extra") {
    a.extra[p.key] = value;
  } else {
    throw InvalidAttributeError("unknown attribute '" + p.attr + "' in path '" +
                                path + "'");
  }
}

double get_attribute(const Network& net, const std::string& path) {
  ParsedPath p = parse_attribute_path(net, path);
  const NodeAttributes& a = net.attributes[static_cast<std::size_t>(p.node)];
  if (p.attr == "mean") return a.mean;
  if (p.attr == "expected_mean") return a.expected_mean;
  if (p.attr == "precision") return a.precision;
  if (p.attr == "expected_precision") return a.expected_precision;
  if (p.attr == "tonic_volatility") return a.tonic_volatility;
  if (p.attr == "value_coupling" || p.attr == "volatility_coupling") {
    const auto& coupling = p.attr == "value_coupling" ? a.value_coupling
                                                      : a.volatility_coupling;
    if (p.sub >= static_cast<int>(coupling.size())) {
      throw IndexError("coupling slot " + std::to_string(p.sub) +
                       " does not exist at '" + path + "'");
    }
    return coupling[static_cast<std::size_t>(p.sub)];
  }
  if (p.attr == "extra") {
    auto it = a.extra.find(p.key);
    if (it == a.extra.end()) {
      throw InvalidAttributeError("extra attribute '" + p.key + "' is not set");
    }
    return it->second;
  }
  throw InvalidAttributeError("unknown attribute '" + p.attr + "' in path '" +
                              path + "'");
}

}  // namespace hgf
