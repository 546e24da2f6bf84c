#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "convoff/errors.hpp"
#include "convoff/hardware.hpp"
#include "convoff/patch.hpp"
#include "convoff/reference.hpp"
#include "convoff/step.hpp"
#include "convoff/tensor.hpp"

#include "json.hpp"

namespace convoff {

/// What one executed step did and what it cost.
struct StepTrace {
  int index = 0;  // 1-based
  int loaded_pixels = 0;
  int loaded_kernels = 0;
  int freed_pixels = 0;
  int freed_kernels = 0;
  int written_positions = 0;
  int computed_elements = 0;
  std::vector<int> computed_positions;  // output positions finished this step
  long long footprint_after = 0;        // elements, end of step
  long long footprint_peak = 0;         // elements, max over the step's actions
  long long duration = 0;               // cycles under the run's cost flags
};

struct Violation {
  ViolationKind kind;
  int step = 0;  // 1-based; 0 for whole-strategy checks
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
  }
};

struct Metrics {
  long long total_duration = 0;
  long long peak_footprint = 0;
  std::vector<long long> step_footprints;  // end-of-step, elements
  long long load_traffic = 0;              // pixels
  long long kernel_loads = 0;              // whole kernels
  long long write_traffic = 0;             // output positions
  std::vector<StepTrace> traces;
};

/// Duration of one step: (|I_slice| + kernel pixel-equivalents) * t_l
/// + written positions * t_w + t_acc when a compute happens. A pixel transfer
/// moves all C_in channels at cost t_l; a kernel moves H_K*W_K pixel-units.
inline long long step_duration(const Step& step, bool includes_compute,
                               const LayerSpec& layer, const HardwareSpec& hw,
                               const CostFlags& flags = {}) {
  long long d = static_cast<long long>(step.i_slice.size()) * hw.t_l;
  if (flags.count_kernel_loads)
    d += static_cast<long long>(step.k_sub.size()) * layer.h_k * layer.w_k * hw.t_l;
  if (flags.count_writes) {
    std::set<int> positions;
    for (const auto& e : step.w) positions.insert(output_position(e, layer));
    d += static_cast<long long>(positions.size()) * hw.t_w;
  }
  if (includes_compute) d += hw.t_acc;
  return d;
}

/// Step-by-step executor. Applies the action sequence
///   a1 free input, a2 free kernels, a3 write back, a4 load input slice,
///   a5 load kernels, a6 compute
/// and tracks the on-chip sets, the DRAM output image and per-step costs.
/// a6 computes every output element whose full patch window and kernel are
/// resident and that has not been computed yet.
///
/// In strict mode rule breaches throw SimError; in collect mode they are
/// recorded and execution continues best effort (used by the validator).
class Machine {
 public:
  Machine(const LayerSpec& layer, const HardwareSpec& hw, CostFlags flags = {},
          const Tensor3* input = nullptr,
          const std::vector<Tensor3>* kernels = nullptr, bool collect = false)
      : layer_(layer),
        hw_(hw),
        flags_(flags),
        collect_(collect),
        input_(input),
        kernels_(kernels),
        pixel_patches_(patches_by_pixel(layer)),
        resident_count_(static_cast<size_t>(layer.n_patches()), 0),
        computed_(static_cast<size_t>(layer.n_patches()) * layer.c_out(), 0),
        pixel_loads_(static_cast<size_t>(layer.n_pixels()), 0),
        kernel_loads_(static_cast<size_t>(layer.n_kernels), 0),
        dram_out_(static_cast<size_t>(layer.output_elements()), 0.0),
        write_count_(static_cast<size_t>(layer.output_elements()), 0) {
    layer_.validate();
    hw_.validate();
    hw_.check_dram(layer_);
    if (input_ && (input_->channels != layer.c_in || input_->height != layer.h_in ||
                   input_->width != layer.w_in))
      throw ShapeError("Machine: input tensor does not match layer");
    if (kernels_ && static_cast<int>(kernels_->size()) != layer.n_kernels)
      throw ShapeError("Machine: kernel count mismatch");
    numeric_ = input_ != nullptr && kernels_ != nullptr;
  }

  const MemoryState& memory() const { return mem_; }
  const std::vector<Violation>& violations() const { return violations_; }
  long long total_loads() const { return total_pixel_loads_; }
  long long total_frees() const { return total_pixel_frees_; }
  long long total_kernel_loads() const { return total_kernel_loads_; }
  long long total_writes() const { return total_write_positions_; }

  /// Seed the memory state (for single-step experiments). Resident outputs
  /// count as the only computed elements.
  void set_state(const MemoryState& s) {
    mem_ = s;
    std::fill(resident_count_.begin(), resident_count_.end(), 0);
    for (int px : mem_.m_inp)
      for (int p : pixel_patches_[static_cast<size_t>(px)])
        ++resident_count_[static_cast<size_t>(p)];
    std::fill(computed_.begin(), computed_.end(), 0);
    for (const auto& e : mem_.m_out)
      computed_[element_index(e)] = 1;
  }

  StepTrace execute(const Step& step, int index) {
    StepTrace tr;
    tr.index = index;
    capacity_reported_this_step_ = false;
    long long peak = mem_.footprint_elements(layer_);

    // a1: free input pixels
    for (int px : step.f_inp) {
      auto it = mem_.m_inp.find(px);
      if (it == mem_.m_inp.end()) {
        report(ViolationKind::free_absent, index, "pixel " + std::to_string(px));
        continue;
      }
      mem_.m_inp.erase(it);
      onchip_pixels_.erase(px);
      for (int p : pixel_patches_[static_cast<size_t>(px)])
        --resident_count_[static_cast<size_t>(p)];
      ++tr.freed_pixels;
      ++total_pixel_frees_;
    }

    // a2: free kernels
    for (int k : step.f_ker) {
      auto it = mem_.m_ker.find(k);
      if (it == mem_.m_ker.end()) {
        report(ViolationKind::free_absent, index, "kernel " + std::to_string(k));
        continue;
      }
      mem_.m_ker.erase(it);
      ++tr.freed_kernels;
    }

    // a3: write back finished outputs
    std::set<int> written_positions;
    for (const auto& e : step.w) {
      auto it = mem_.m_out.find(e);
      if (it == mem_.m_out.end()) {
        report(ViolationKind::write_uncomputed, index,
               "output (" + std::to_string(e.l) + "," + std::to_string(e.i) + "," +
                   std::to_string(e.j) + ")");
        continue;
      }
      const size_t di = element_index(e);
      if (numeric_) dram_out_[di] = onchip_out_[e];
      ++write_count_[di];
      if (write_count_[di] > 1)
        report(ViolationKind::output_written_twice, index,
               "output (" + std::to_string(e.l) + "," + std::to_string(e.i) + "," +
                   std::to_string(e.j) + ")");
      onchip_out_.erase(e);
      mem_.m_out.erase(it);
      written_positions.insert(output_position(e, layer_));
    }
    tr.written_positions = static_cast<int>(written_positions.size());
    total_write_positions_ += tr.written_positions;

    // a4: load the input slice
    for (int px : step.i_slice) {
      if (mem_.m_inp.count(px)) {
        report(ViolationKind::redundant_load, index, "pixel " + std::to_string(px));
        continue;
      }
      mem_.m_inp.insert(px);
      if (numeric_) {
        std::vector<double> vals(static_cast<size_t>(layer_.c_in));
        const PixelId pid = pixel_from_linear(px, layer_);
        for (int c = 0; c < layer_.c_in; ++c)
          vals[static_cast<size_t>(c)] = input_->at(c, pid.h, pid.w);
        onchip_pixels_[px] = std::move(vals);
      }
      for (int p : pixel_patches_[static_cast<size_t>(px)])
        ++resident_count_[static_cast<size_t>(p)];
      ++pixel_loads_[static_cast<size_t>(px)];
      ++tr.loaded_pixels;
      ++total_pixel_loads_;
    }
    peak = std::max(peak, check_capacity(index));

    // a5: load kernels
    for (int k : step.k_sub) {
      if (mem_.m_ker.count(k)) {
        report(ViolationKind::redundant_load, index, "kernel " + std::to_string(k));
        continue;
      }
      mem_.m_ker.insert(k);
      ++kernel_loads_[static_cast<size_t>(k)];
      ++tr.loaded_kernels;
      ++total_kernel_loads_;
    }
    peak = std::max(peak, check_capacity(index));

    // a6: compute everything that became fully resident
    const int full = layer_.h_k * layer_.w_k;
    std::vector<OutputElementId> fresh;
    std::vector<char> fresh_patch(static_cast<size_t>(layer_.n_patches()), 0);
    std::vector<char> fresh_channel(static_cast<size_t>(layer_.c_out()), 0);
    for (int pos = 0; pos < layer_.n_patches(); ++pos) {
      if (resident_count_[static_cast<size_t>(pos)] != full) continue;
      const Patch p = patch_from_linear(pos, layer_);
      for (int l : mem_.m_ker) {
        if (computed_[element_index({l, p.i, p.j})]) continue;
        fresh.push_back({l, p.i, p.j});
        fresh_patch[static_cast<size_t>(pos)] = 1;
        fresh_channel[static_cast<size_t>(l)] = 1;
      }
      if (fresh_patch[static_cast<size_t>(pos)]) tr.computed_positions.push_back(pos);
    }
    const long long ops = static_cast<long long>(fresh.size()) * nb_op_value(layer_);
    if (ops > hw_.nbop_pe)
      report(ViolationKind::ops_budget_exceeded, index,
             std::to_string(ops) + " MACs > nbop_pe " + std::to_string(hw_.nbop_pe));
    for (const auto& e : fresh) {
      computed_[element_index(e)] = 1;
      mem_.m_out.insert(e);
      if (numeric_) onchip_out_[e] = compute_element(e);
    }
    tr.computed_elements = static_cast<int>(fresh.size());
    peak = std::max(peak, check_capacity(index));

    // loaded data must serve this step's compute
    for (int px : step.i_slice) {
      bool used = false;
      for (int p : pixel_patches_[static_cast<size_t>(px)])
        if (fresh_patch[static_cast<size_t>(p)]) { used = true; break; }
      if (!used) {
        report(ViolationKind::load_not_consumed, index, "pixel " + std::to_string(px));
        break;
      }
    }
    for (int k : step.k_sub) {
      if (!fresh_channel[static_cast<size_t>(k)]) {
        report(ViolationKind::load_not_consumed, index, "kernel " + std::to_string(k));
        break;
      }
    }

    tr.footprint_after = mem_.footprint_elements(layer_);
    tr.footprint_peak = peak;
    tr.duration = step_duration(step, !fresh.empty(), layer_, hw_, flags_);
    return tr;
  }

  bool all_outputs_written() const {
    return std::all_of(write_count_.begin(), write_count_.end(),
                       [](int c) { return c == 1; });
  }

  int write_count_of(const OutputElementId& e) const {
    return write_count_[element_index(e)];
  }
  bool computed(const OutputElementId& e) const {
    return computed_[element_index(e)] != 0;
  }
  int pixel_load_count(int px) const { return pixel_loads_[static_cast<size_t>(px)]; }
  int kernel_load_count(int k) const { return kernel_loads_[static_cast<size_t>(k)]; }

  /// Reconstruct the output tensor from the DRAM image. Throws MismatchError
  /// if some element was never written back.
  Tensor3 assemble_output() const {
    Tensor3 out(layer_.c_out(), layer_.h_out(), layer_.w_out(), 0.0);
    for (int l = 0; l < layer_.c_out(); ++l)
      for (int i = 0; i < layer_.h_out(); ++i)
        for (int j = 0; j < layer_.w_out(); ++j) {
          const size_t di = element_index({l, i, j});
          if (write_count_[di] == 0)
            throw MismatchError("output (" + std::to_string(l) + "," +
                                std::to_string(i) + "," + std::to_string(j) +
                                ") was never written back");
          out.at(l, i, j) = dram_out_[di];
        }
    return out;
  }

 private:
  size_t element_index(const OutputElementId& e) const {
    return (static_cast<size_t>(e.l) * layer_.h_out() + e.i) * layer_.w_out() + e.j;
  }

  long long check_capacity(int index) {
    const long long fp = mem_.footprint_elements(layer_);
    if (fp > hw_.size_mem && !capacity_reported_this_step_) {
      capacity_reported_this_step_ = true;  // one report per step in collect mode
      report(ViolationKind::capacity_exceeded, index,
             std::to_string(fp) + " elements > size_mem " +
                 std::to_string(hw_.size_mem));
    }
    return fp;
  }

  double compute_element(const OutputElementId& e) const {
    double acc = 0.0;
    const int h0 = layer_.s_h * e.i;
    const int w0 = layer_.s_w * e.j;
    const Tensor3& ker = (*kernels_)[static_cast<size_t>(e.l)];
    for (int dh = 0; dh < layer_.h_k; ++dh)
      for (int dw = 0; dw < layer_.w_k; ++dw) {
        const auto it = onchip_pixels_.find((h0 + dh) * layer_.w_in + (w0 + dw));
        if (it == onchip_pixels_.end()) continue;  // cannot happen: window is resident
        for (int c = 0; c < layer_.c_in; ++c)
          acc += it->second[static_cast<size_t>(c)] * ker.at(c, dh, dw);
      }
    return acc;
  }

  void report(ViolationKind kind, int step, const std::string& detail) {
    if (!collect_) throw SimError(kind, step, detail);
    violations_.push_back({kind, step, detail});
  }

  LayerSpec layer_;
  HardwareSpec hw_;
  CostFlags flags_;
  bool collect_ = false;
  bool numeric_ = false;
  const Tensor3* input_ = nullptr;
  const std::vector<Tensor3>* kernels_ = nullptr;

  std::vector<std::vector<int>> pixel_patches_;

  MemoryState mem_;
  std::vector<int> resident_count_;
  std::vector<char> computed_;
  std::vector<int> pixel_loads_;
  std::vector<int> kernel_loads_;
  std::map<int, std::vector<double>> onchip_pixels_;
  std::map<OutputElementId, double> onchip_out_;
  std::vector<double> dram_out_;
  std::vector<int> write_count_;
  std::vector<Violation> violations_;
  long long total_pixel_loads_ = 0;
  long long total_pixel_frees_ = 0;
  long long total_kernel_loads_ = 0;
  long long total_write_positions_ = 0;
  bool capacity_reported_this_step_ = false;
};

/// Apply one step to a memory state (set evolution only).
inline std::pair<MemoryState, StepTrace> execute_step(const MemoryState& state,
                                                      const Step& step,
                                                      const LayerSpec& layer,
                                                      const HardwareSpec& hw,
                                                      CostFlags flags = {},
                                                      int index = 1) {
  Machine m(layer, hw, flags);
  m.set_state(state);
  StepTrace tr = m.execute(step, index);
  return {m.memory(), tr};
}

/// Total duration of a strategy (terminal flush included: compiled strategies
/// carry it as their last step).
inline long long strategy_duration(const Strategy& strategy, const LayerSpec& layer,
                                   const HardwareSpec& hw, CostFlags flags = {}) {
  Machine m(layer, hw, flags);
  long long total = 0;
  int index = 1;
  for (const Step& s : strategy.steps) total += m.execute(s, index++).duration;
  return total;
}

/// Run every check without throwing: per-step rules, the reload bound, final
/// memory emptiness and exactly-once write-back of every output element.
inline ValidationReport validate_strategy(const Strategy& strategy,
                                          const LayerSpec& layer,
                                          const HardwareSpec& hw,
                                          CostFlags flags = {},
                                          int nb_data_reload = 2) {
  Machine m(layer, hw, flags, nullptr, nullptr, /*collect=*/true);
  int index = 1;
  for (const Step& s : strategy.steps) m.execute(s, index++);
  ValidationReport report;
  report.violations = m.violations();
  const int n = static_cast<int>(strategy.steps.size());

  if (!m.memory().empty())
    report.violations.push_back(
        {ViolationKind::final_memory_nonempty, n,
         std::to_string(m.memory().m_inp.size()) + " pixels, " +
             std::to_string(m.memory().m_ker.size()) + " kernels, " +
             std::to_string(m.memory().m_out.size()) + " outputs resident"});

  for (int px = 0; px < layer.n_pixels(); ++px)
    if (m.pixel_load_count(px) > nb_data_reload)
      report.violations.push_back({ViolationKind::reload_exceeded, 0,
                                   "pixel " + std::to_string(px) + " loaded " +
                                       std::to_string(m.pixel_load_count(px)) +
                                       " times (bound " +
                                       std::to_string(nb_data_reload) + ")"});
  for (int k = 0; k < layer.n_kernels; ++k)
    if (m.kernel_load_count(k) > nb_data_reload)
      report.violations.push_back({ViolationKind::reload_exceeded, 0,
                                   "kernel " + std::to_string(k) + " loaded " +
                                       std::to_string(m.kernel_load_count(k)) +
                                       " times (bound " +
                                       std::to_string(nb_data_reload) + ")"});

  for (int l = 0; l < layer.c_out(); ++l)
    for (int i = 0; i < layer.h_out(); ++i)
      for (int j = 0; j < layer.w_out(); ++j) {
        const int wc = m.write_count_of({l, i, j});
        if (wc == 0)
          report.violations.push_back(
              {ViolationKind::output_missing, 0,
               "output (" + std::to_string(l) + "," + std::to_string(i) + "," +
                   std::to_string(j) + ") never written"});
      }
  return report;
}

/// Execute a strategy numerically, assemble the DRAM output image and demand
/// exact equality with the reference convolution.
inline std::pair<Tensor3, Metrics> run_and_verify(const Strategy& strategy,
                                                  const Tensor3& input,
                                                  const std::vector<Tensor3>& kernels,
                                                  const LayerSpec& layer,
                                                  const HardwareSpec& hw,
                                                  CostFlags flags = {}) {
  Machine m(layer, hw, flags, &input, &kernels);
  Metrics metrics;
  int index = 1;
  for (const Step& s : strategy.steps) {
    StepTrace tr = m.execute(s, index++);
    metrics.total_duration += tr.duration;
    metrics.peak_footprint = std::max(metrics.peak_footprint, tr.footprint_peak);
    metrics.step_footprints.push_back(tr.footprint_after);
    metrics.traces.push_back(std::move(tr));
  }
  metrics.load_traffic = m.total_loads();
  metrics.kernel_loads = m.total_kernel_loads();
  metrics.write_traffic = m.total_writes();

  Tensor3 out = m.assemble_output();
  const Tensor3 ref = reference_convolution(input, kernels, layer);
  if (!(out == ref)) throw MismatchError("simulated output differs from reference");
  return {std::move(out), std::move(metrics)};
}

/// One JSON record per step: step index, |I_slice|, |W|, |K_sub|, footprint, delta.
inline std::string traces_to_jsonl(const std::vector<StepTrace>& traces) {
  std::ostringstream os;
  for (const StepTrace& t : traces) {
    nlohmann::ordered_json rec;
    rec["step"] = t.index;
    rec["i_slice"] = t.loaded_pixels;
    rec["w"] = t.written_positions;
    rec["k_sub"] = t.loaded_kernels;
    rec["footprint"] = t.footprint_after;
    rec["delta"] = t.duration;
    os << rec.dump() << "\n";
  }
  return os.str();
}

}  // namespace convoff
