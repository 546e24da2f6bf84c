#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "convoff/errors.hpp"
#include "convoff/hardware.hpp"
#include "convoff/patch.hpp"
#include "convoff/step.hpp"

namespace convoff {

/// Ordered partition of the patch set: group k holds the patches computed at
/// step k. Groups are sets; members are kept sorted by row-major patch id.
struct GroupSchedule {
  std::vector<std::vector<int>> groups;
  int h_out = 0;
  int w_out = 0;

  int n_patches() const { return h_out * w_out; }

  void normalize() {
    for (auto& g : groups) std::sort(g.begin(), g.end());
    groups.erase(std::remove_if(groups.begin(), groups.end(),
                                [](const std::vector<int>& g) { return g.empty(); }),
                 groups.end());
  }

  /// Every patch in exactly one group, ids in range.
  void validate() const {
    std::vector<char> seen(static_cast<size_t>(n_patches()), 0);
    for (const auto& g : groups)
      for (int p : g) {
        if (p < 0 || p >= n_patches())
          throw ShapeError("GroupSchedule: patch id " + std::to_string(p) +
                           " out of range");
        if (seen[static_cast<size_t>(p)])
          throw ShapeError("GroupSchedule: patch " + std::to_string(p) +
                           " assigned twice");
        seen[static_cast<size_t>(p)] = 1;
      }
    for (int p = 0; p < n_patches(); ++p)
      if (!seen[static_cast<size_t>(p)])
        throw ShapeError("GroupSchedule: patch " + std::to_string(p) +
                         " not assigned to any group");
  }

  bool operator==(const GroupSchedule& o) const {
    return groups == o.groups && h_out == o.h_out && w_out == o.w_out;
  }
};

/// Per-step patch capacity and the step-count range it induces.
struct S1Params {
  long long nb_patches_max = 1;  // floor(nbop_pe / (nb_op_value * C_out))
  long long k_min = 1;           // ceil(|X| / nb_patches_max)
  long long k_max = 1;           // |X|
};

inline S1Params s1_params(const LayerSpec& layer, const HardwareSpec& hw,
                          long long nb_patches_max_override = 0) {
  layer.validate();
  hw.validate();
  S1Params p;
  const long long per_patch = nb_op_value(layer) * layer.c_out();
  p.nb_patches_max =
      nb_patches_max_override > 0 ? nb_patches_max_override : hw.nbop_pe / per_patch;
  if (p.nb_patches_max < 1)
    throw AcceleratorTooSmall("nbop_pe " + std::to_string(hw.nbop_pe) +
                              " cannot cover one patch (" +
                              std::to_string(per_patch) + " MACs)");
  const long long x = layer.n_patches();
  p.k_min = (x + p.nb_patches_max - 1) / p.nb_patches_max;
  p.k_max = x;
  return p;
}

namespace detail {
inline GroupSchedule chunk(const std::vector<int>& order, int group_size,
                           const LayerSpec& layer) {
  if (group_size < 1) throw ShapeError("group size must be >= 1");
  GroupSchedule s;
  s.h_out = layer.h_out();
  s.w_out = layer.w_out();
  for (size_t i = 0; i < order.size(); i += static_cast<size_t>(group_size)) {
    const size_t end = std::min(order.size(), i + static_cast<size_t>(group_size));
    s.groups.emplace_back(order.begin() + static_cast<long>(i),
                          order.begin() + static_cast<long>(end));
  }
  s.normalize();
  return s;
}
}  // namespace detail

/// One patch per step, row-major order. All kernels stay resident from the
/// first step to the last.
inline GroupSchedule gen_s1_baseline(const LayerSpec& layer) {
  layer.validate();
  std::vector<int> order(static_cast<size_t>(layer.n_patches()));
  for (int p = 0; p < layer.n_patches(); ++p) order[static_cast<size_t>(p)] = p;
  return detail::chunk(order, 1, layer);
}

/// Row-major patch order chunked into groups of group_size (the last group
/// may be smaller).
inline GroupSchedule gen_row_by_row(const LayerSpec& layer, int group_size) {
  layer.validate();
  std::vector<int> order(static_cast<size_t>(layer.n_patches()));
  for (int p = 0; p < layer.n_patches(); ++p) order[static_cast<size_t>(p)] = p;
  return detail::chunk(order, group_size, layer);
}

/// Boustrophedon patch order (even rows left to right, odd rows right to
/// left) chunked into groups of group_size.
inline GroupSchedule gen_zigzag(const LayerSpec& layer, int group_size) {
  layer.validate();
  std::vector<int> order;
  order.reserve(static_cast<size_t>(layer.n_patches()));
  for (int i = 0; i < layer.h_out(); ++i) {
    if (i % 2 == 0)
      for (int j = 0; j < layer.w_out(); ++j) order.push_back(i * layer.w_out() + j);
    else
      for (int j = layer.w_out() - 1; j >= 0; --j)
        order.push_back(i * layer.w_out() + j);
  }
  return detail::chunk(order, group_size, layer);
}

/// Lower a group schedule to concrete steps.
///
/// Step k loads the pixels of group k that are not already resident and frees
/// the resident pixels the group does not need (the next group's needs decide
/// what survives). All kernels are loaded at step 1. Outputs computed at step
/// k are written back at step k+1; a final flush step writes the last group's
/// outputs and empties the memory.
inline Strategy compile(const GroupSchedule& schedule, const LayerSpec& layer,
                        const HardwareSpec& hw, const std::string& provenance = "") {
  layer.validate();
  hw.validate();
  GroupSchedule s = schedule;
  s.normalize();
  s.validate();
  if (s.h_out != layer.h_out() || s.w_out != layer.w_out())
    throw ShapeError("compile: schedule grid does not match layer");

  const long long per_patch_ops = nb_op_value(layer) * layer.c_out();
  const long long kernel_elems = layer.kernel_elements();

  Strategy strat;
  strat.provenance = provenance;
  std::set<int> resident;
  std::vector<int> prev_group;
  const int n = static_cast<int>(s.groups.size());
  for (int k = 0; k < n; ++k) {
    const auto& g = s.groups[static_cast<size_t>(k)];
    if (static_cast<long long>(g.size()) * per_patch_ops > hw.nbop_pe)
      throw SimError(ViolationKind::ops_budget_exceeded, k + 1,
                     "group of " + std::to_string(g.size()) + " patches needs " +
                         std::to_string(g.size() * per_patch_ops) + " MACs");

    std::set<int> needed;
    for (int p : g)
      for (int px : patch_footprint_linear(p, layer)) needed.insert(px);

    Step step;
    if (k == 0)
      for (int ker = 0; ker < layer.n_kernels; ++ker) step.k_sub.insert(ker);
    for (int px : resident)
      if (!needed.count(px)) step.f_inp.insert(px);
    for (int px : needed)
      if (!resident.count(px)) step.i_slice.insert(px);
    for (int p : prev_group) {
      const Patch pc = patch_from_linear(p, layer);
      for (int l = 0; l < layer.c_out(); ++l) step.w.insert({l, pc.i, pc.j});
    }

    // peak footprint of this step: the group's pixels, all kernels, and the
    // group's freshly computed outputs
    const long long peak = static_cast<long long>(needed.size()) * layer.c_in +
                           kernel_elems +
                           static_cast<long long>(g.size()) * layer.c_out();
    if (peak > hw.size_mem)
      throw SimError(ViolationKind::capacity_exceeded, k + 1,
                     std::to_string(peak) + " elements > size_mem " +
                         std::to_string(hw.size_mem));

    strat.steps.push_back(std::move(step));
    resident = std::move(needed);
    prev_group = g;
  }

  // terminal flush: write the last group's outputs, drop everything resident
  Step flush;
  for (int px : resident) flush.f_inp.insert(px);
  for (int ker = 0; ker < layer.n_kernels; ++ker) flush.f_ker.insert(ker);
  for (int p : prev_group) {
    const Patch pc = patch_from_linear(p, layer);
    for (int l = 0; l < layer.c_out(); ++l) flush.w.insert({l, pc.i, pc.j});
  }
  strat.steps.push_back(std::move(flush));
  return strat;
}

}  // namespace convoff
