#pragma once

#include <set>
#include <string>
#include <vector>

#include "convoff/layer.hpp"

namespace convoff {

/// One scalar of the output tensor.
struct OutputElementId {
  int l = 0;  // output channel
  int i = 0;  // row
  int j = 0;  // column
  auto operator<=>(const OutputElementId&) const = default;
};

inline int output_position(const OutputElementId& e, const LayerSpec& layer) {
  return e.i * layer.w_out() + e.j;
}

/// One offloading step: free input pixels and kernels, write back finished
/// outputs, load an input slice and a kernel subset, then compute. Pixels are
/// linear ids (h * W_in + w), kernels are kernel indices.
struct Step {
  std::set<int> f_inp;             // input pixels to free
  std::set<int> f_ker;             // kernels to free
  std::set<OutputElementId> w;     // output elements to write back
  std::set<int> i_slice;           // input pixels to load
  std::set<int> k_sub;             // kernels to load

  bool empty() const {
    return f_inp.empty() && f_ker.empty() && w.empty() && i_slice.empty() &&
           k_sub.empty();
  }
};

/// On-chip memory contents after a step.
struct MemoryState {
  std::set<int> m_inp;              // resident input pixels
  std::set<int> m_ker;              // resident kernels
  std::set<OutputElementId> m_out;  // computed, not yet written back

  bool empty() const { return m_inp.empty() && m_ker.empty() && m_out.empty(); }

  /// Scalar elements occupied.
  long long footprint_elements(const LayerSpec& layer) const {
    return static_cast<long long>(m_inp.size()) * layer.c_in +
           static_cast<long long>(m_ker.size()) * layer.c_in * layer.h_k * layer.w_k +
           static_cast<long long>(m_out.size());
  }
};

/// An ordered n-step computation. Compiled strategies end with a flush step
/// that writes the last group's outputs and empties the on-chip memory; it
/// performs no compute, so it never charges t_acc.
struct Strategy {
  std::vector<Step> steps;
  std::string write_back_policy = "next-step";
  std::string provenance;  // generator name, "ilp", or "csv"
};

}  // namespace convoff
