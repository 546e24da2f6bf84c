#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "convoff/errors.hpp"
#include "convoff/hardware.hpp"
#include "convoff/layer.hpp"
#include "convoff/tensor.hpp"

namespace convoff {

/// Flat key = value experiment description: the layer (unpadded dimensions
/// plus padding amounts), the hardware, one strategy source, the cost flags
/// and the solver knobs. Input data is drawn as seeded small integers so
/// functional checks are exact.
struct ExperimentConfig {
  // layer, pre-padding
  int c_in = 1, h_in = 1, w_in = 1;
  int n_kernels = 1, h_k = 1, w_k = 1;
  int stride_h = 1, stride_w = 1;
  int pad_top = 0, pad_bottom = 0, pad_left = 0, pad_right = 0;
  // hardware
  long long nbop_pe = 1, size_mem = 1, dram_size = 0;
  long long t_l = 1, t_w = 1, t_acc = 1;
  // strategy source (exactly one of generator / csv for simulation)
  std::string strategy;      // rowbyrow | zigzag | s1-baseline
  int group_size = 1;
  std::string strategy_csv;  // path to a schedule CSV
  // cost flags and knobs
  bool count_kernel_loads = false;
  bool count_writes = true;
  int nb_data_reload = 2;
  long long nb_patches_max = 0;  // 0 = derive from nbop_pe
  double solver_budget_seconds = 120.0;
  unsigned long seed = 1;

  bool operator==(const ExperimentConfig&) const = default;

  /// The layer with padding folded into the spatial dimensions.
  LayerSpec layer() const {
    LayerSpec l;
    l.c_in = c_in;
    l.h_in = h_in + pad_top + pad_bottom;
    l.w_in = w_in + pad_left + pad_right;
    l.n_kernels = n_kernels;
    l.h_k = h_k;
    l.w_k = w_k;
    l.s_h = stride_h;
    l.s_w = stride_w;
    l.p_top = pad_top;
    l.p_bottom = pad_bottom;
    l.p_left = pad_left;
    l.p_right = pad_right;
    l.validate();
    return l;
  }

  HardwareSpec hardware() const {
    HardwareSpec hw{nbop_pe, size_mem, t_l, t_w, t_acc, dram_size};
    hw.validate();
    hw.check_dram(layer());
    return hw;
  }

  CostFlags cost_flags() const { return CostFlags{count_kernel_loads, count_writes}; }

  void require_one_source() const {
    const bool gen = !strategy.empty();
    const bool csv = !strategy_csv.empty();
    if (gen == csv)
      throw ParseError(
          "config must name exactly one strategy source (strategy or strategy_csv)");
    if (gen && strategy != "rowbyrow" && strategy != "zigzag" &&
        strategy != "s1-baseline")
      throw ParseError("unknown strategy '" + strategy + "'");
  }

  /// Seeded input and kernels; the input is padded with zeros.
  std::pair<Tensor3, std::vector<Tensor3>> make_tensors() const {
    std::mt19937 engine(static_cast<std::mt19937::result_type>(seed));
    Tensor3 raw = random_int_tensor(c_in, h_in, w_in, engine);
    Tensor3 input = pad_spatial(raw, pad_top, pad_bottom, pad_left, pad_right);
    std::vector<Tensor3> kernels;
    kernels.reserve(static_cast<size_t>(n_kernels));
    for (int k = 0; k < n_kernels; ++k)
      kernels.push_back(random_int_tensor(c_in, h_k, w_k, engine));
    return {std::move(input), std::move(kernels)};
  }
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError("config key '" + key + "': expected true/false, got '" + v + "'");
}
}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));

    if (key == "c_in") c.c_in = static_cast<int>(detail::to_int(key, val));
    else if (key == "h_in") c.h_in = static_cast<int>(detail::to_int(key, val));
    else if (key == "w_in") c.w_in = static_cast<int>(detail::to_int(key, val));
    else if (key == "n_kernels") c.n_kernels = static_cast<int>(detail::to_int(key, val));
    else if (key == "h_k") c.h_k = static_cast<int>(detail::to_int(key, val));
    else if (key == "w_k") c.w_k = static_cast<int>(detail::to_int(key, val));
    else if (key == "stride_h") c.stride_h = static_cast<int>(detail::to_int(key, val));
    else if (key == "stride_w") c.stride_w = static_cast<int>(detail::to_int(key, val));
    else if (key == "pad_top") c.pad_top = static_cast<int>(detail::to_int(key, val));
    else if (key == "pad_bottom") c.pad_bottom = static_cast<int>(detail::to_int(key, val));
    else if (key == "pad_left") c.pad_left = static_cast<int>(detail::to_int(key, val));
    else if (key == "pad_right") c.pad_right = static_cast<int>(detail::to_int(key, val));
    else if (key == "nbop_pe") c.nbop_pe = detail::to_int(key, val);
    else if (key == "size_mem") c.size_mem = detail::to_int(key, val);
    else if (key == "dram_size") c.dram_size = detail::to_int(key, val);
    else if (key == "t_l") c.t_l = detail::to_int(key, val);
    else if (key == "t_w") c.t_w = detail::to_int(key, val);
    else if (key == "t_acc") c.t_acc = detail::to_int(key, val);
    else if (key == "strategy") c.strategy = val;
    else if (key == "group_size") c.group_size = static_cast<int>(detail::to_int(key, val));
    else if (key == "strategy_csv") c.strategy_csv = val;
    else if (key == "count_kernel_loads") c.count_kernel_loads = detail::to_bool(key, val);
    else if (key == "count_writes") c.count_writes = detail::to_bool(key, val);
    else if (key == "nb_data_reload") c.nb_data_reload = static_cast<int>(detail::to_int(key, val));
    else if (key == "nb_patches_max") c.nb_patches_max = detail::to_int(key, val);
    else if (key == "solver_budget_seconds") c.solver_budget_seconds = detail::to_double(key, val);
    else if (key == "seed") c.seed = static_cast<unsigned long>(detail::to_int(key, val));
    else throw ParseError("config line " + std::to_string(lineno) +
                          ": unknown key '" + key + "'");
  }
  return c;
}

inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "# layer\n";
  os << "c_in = " << c.c_in << "\n";
  os << "h_in = " << c.h_in << "\n";
  os << "w_in = " << c.w_in << "\n";
  os << "n_kernels = " << c.n_kernels << "\n";
  os << "h_k = " << c.h_k << "\n";
  os << "w_k = " << c.w_k << "\n";
  os << "stride_h = " << c.stride_h << "\n";
  os << "stride_w = " << c.stride_w << "\n";
  os << "pad_top = " << c.pad_top << "\n";
  os << "pad_bottom = " << c.pad_bottom << "\n";
  os << "pad_left = " << c.pad_left << "\n";
  os << "pad_right = " << c.pad_right << "\n";
  os << "# hardware\n";
  os << "nbop_pe = " << c.nbop_pe << "\n";
  os << "size_mem = " << c.size_mem << "\n";
  os << "dram_size = " << c.dram_size << "\n";
  os << "t_l = " << c.t_l << "\n";
  os << "t_w = " << c.t_w << "\n";
  os << "t_acc = " << c.t_acc << "\n";
  os << "# strategy source\n";
  if (!c.strategy.empty()) os << "strategy = " << c.strategy << "\n";
  if (!c.strategy_csv.empty()) os << "strategy_csv = " << c.strategy_csv << "\n";
  os << "group_size = " << c.group_size << "\n";
  os << "# cost model and knobs\n";
  os << "count_kernel_loads = " << (c.count_kernel_loads ? "true" : "false") << "\n";
  os << "count_writes = " << (c.count_writes ? "true" : "false") << "\n";
  os << "nb_data_reload = " << c.nb_data_reload << "\n";
  os << "nb_patches_max = " << c.nb_patches_max << "\n";
  os << "solver_budget_seconds = " << c.solver_budget_seconds << "\n";
  os << "seed = " << c.seed << "\n";
  return os.str();
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace convoff
