#pragma once

#include <stdexcept>
#include <string>

namespace convoff {

/// Failure kinds raised while executing a step or validating a strategy.
enum class ViolationKind {
  free_absent,           // a freed pixel/kernel was not resident
  redundant_load,        // a load target was already resident after the frees
  write_uncomputed,      // a write-back names an output that was never computed
  capacity_exceeded,     // on-chip footprint above size_mem at some instant
  ops_budget_exceeded,   // one step asked for more MACs than nbop_pe
  load_not_consumed,     // loaded data not used by the same step's compute
  reload_exceeded,       // a pixel or kernel loaded more than the reload bound
  final_memory_nonempty, // something left on chip after the last step
  output_missing,        // an output element never written back
  output_written_twice,  // an output element written back more than once
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::free_absent: return "free_absent";
    case ViolationKind::redundant_load: return "redundant_load";
    case ViolationKind::write_uncomputed: return "write_uncomputed";
    case ViolationKind::capacity_exceeded: return "capacity_exceeded";
    case ViolationKind::ops_budget_exceeded: return "ops_budget_exceeded";
    case ViolationKind::load_not_consumed: return "load_not_consumed";
    case ViolationKind::reload_exceeded: return "reload_exceeded";
    case ViolationKind::final_memory_nonempty: return "final_memory_nonempty";
    case ViolationKind::output_missing: return "output_missing";
    case ViolationKind::output_written_twice: return "output_written_twice";
  }
  return "unknown";
}

/// Step execution error; `step` is the 1-based index of the offending step.
class SimError : public std::runtime_error {
 public:
  SimError(ViolationKind kind, int step, const std::string& detail)
      : std::runtime_error("step " + std::to_string(step) + ": " +
                           to_string(kind) + (detail.empty() ? "" : " (" + detail + ")")),
        kind_(kind),
        step_(step) {}

  ViolationKind kind() const { return kind_; }
  int step() const { return step_; }

 private:
  ViolationKind kind_;
  int step_;
};

/// Tensor/layer dimension mismatch.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Simulated output differs from the reference convolution.
class MismatchError : public std::runtime_error {
 public:
  explicit MismatchError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed config, CSV or CLI input.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// The accelerator cannot hold even one patch worth of work.
class AcceleratorTooSmall : public std::runtime_error {
 public:
  explicit AcceleratorTooSmall(const std::string& what) : std::runtime_error(what) {}
};

/// Brute-force oracle guard.
class InstanceTooLarge : public std::runtime_error {
 public:
  explicit InstanceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

/// No assignment satisfies the model constraints.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace convoff
