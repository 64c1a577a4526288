#pragma once

#include <stdexcept>
#include <string>

namespace hgf {

// Base for everything thrown by this library. Callers that want a single
// catch point use hgf::Error; finer-grained types below signal which contract
// was violated.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Attribute values outside their admissible range (precision <= 0, coupling
// strength < 0, malformed attribute path, ...).
class InvalidAttributeError : public Error {
 public:
  using Error::Error;
};

// Node index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Edge insertion or replacement would create a directed cycle.
class CycleError : public Error {
 public:
  using Error::Error;
};

// Edge already present for the given coupling type, or repeated parent in a
// wholesale replacement.
class DuplicateEdgeError : public Error {
 public:
  using Error::Error;
};

// Update-step ordering violated: a step ran before the state it consumes was
// produced (e.g. prediction error before prediction), or an empty sequence.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// Paired series have mismatched lengths (inputs vs actions, pointwise
// likelihood matrices across models, ...).
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Value outside the mathematical domain of an operation (e.g. an action
// probability queried for an expected mean outside (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Config or parameter-space schema violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input files; message carries the 1-based row number.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite or ill-posed values produced during belief propagation. Carries
// the node index and the time-step at which propagation failed.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int node, long step)
      : Error(what + " (node " + std::to_string(node) + ", step " +
              std::to_string(step) + ")"),
        node_(node),
        step_(step) {}
  int node() const noexcept { return node_; }
  long step() const noexcept { return step_; }

 private:
  int node_;
  long step_;
};

// Sampler could not start or made no progress (all proposals rejected during
// warmup, no finite initial point, fewer chains than diagnostics need).
class SamplerError : public Error {
 public:
  using Error::Error;
};

// All optimizer starts failed to find a finite objective value.
class OptimizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hgf
