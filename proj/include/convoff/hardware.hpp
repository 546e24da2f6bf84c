#pragma once

#include "convoff/errors.hpp"
#include "convoff/layer.hpp"

namespace convoff {

/// Accelerator description. Sizes are in scalar elements; durations in cycles.
struct HardwareSpec {
  long long nbop_pe = 1;    // MAC operations per accelerator invocation
  long long size_mem = 1;   // on-chip capacity, scalar elements
  long long t_l = 1;        // cycles to load one pixel (all C_in channels)
  long long t_w = 1;        // cycles to write back one output position
  long long t_acc = 1;      // cycles per compute invocation
  long long dram_size = 0;  // off-chip capacity; 0 = unchecked

  void validate() const {
    if (nbop_pe < 1 || size_mem < 1 || t_l < 1 || t_w < 1 || t_acc < 1)
      throw ShapeError("HardwareSpec: all parameters must be strictly positive");
    if (dram_size < 0) throw ShapeError("HardwareSpec: negative dram_size");
  }

  /// DRAM must hold the whole input, kernels and output.
  void check_dram(const LayerSpec& layer) const {
    if (dram_size <= 0) return;
    const long long need =
        layer.input_elements() + layer.kernel_elements() + layer.output_elements();
    if (need > dram_size)
      throw ShapeError("HardwareSpec: dram_size " + std::to_string(dram_size) +
                       " cannot hold the layer (" + std::to_string(need) + " elements)");
  }
};

/// What the duration model charges for. Loads of input pixels and the t_acc
/// per compute invocation are always counted; kernel transfers default to
/// preloaded (free) and write-backs default to counted.
struct CostFlags {
  bool count_kernel_loads = false;
  bool count_writes = true;
};

/// Duration accounting used by the optimizer: write-backs and kernel loads
/// are not charged.
inline CostFlags objective_cost_flags() { return CostFlags{false, false}; }

}  // namespace convoff
