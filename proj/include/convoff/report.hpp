#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "convoff/schedule.hpp"
#include "convoff/simulator.hpp"

namespace convoff {

/// Fixed 12-color cycle keyed by (group index - 1) mod 12.
inline const char* group_color(int group_1based) {
  static const char* palette[12] = {
      "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
      "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295"};
  return palette[(group_1based - 1) % 12];
}

namespace detail {
inline std::vector<int> cell_labels(const GroupSchedule& schedule) {
  std::vector<int> labels(static_cast<size_t>(schedule.n_patches()), 0);
  for (int k = 0; k < static_cast<int>(schedule.groups.size()); ++k)
    for (int p : schedule.groups[static_cast<size_t>(k)])
      labels[static_cast<size_t>(p)] = k + 1;
  return labels;
}
}  // namespace detail

/// Text rendering of the output grid, one 1-based group label per cell.
inline std::string render_grid_ascii(const GroupSchedule& schedule) {
  GroupSchedule s = schedule;
  s.normalize();
  s.validate();
  const auto labels = detail::cell_labels(s);
  int width = 1;
  for (int v = static_cast<int>(s.groups.size()); v >= 10; v /= 10) ++width;
  std::ostringstream os;
  for (int i = 0; i < s.h_out; ++i) {
    for (int j = 0; j < s.w_out; ++j) {
      const int v = labels[static_cast<size_t>(i * s.w_out + j)];
      std::string cell = std::to_string(v);
      if (j) os << ' ';
      os << std::string(static_cast<size_t>(width) - cell.size(), ' ') << cell;
    }
    os << '\n';
  }
  return os.str();
}

/// SVG rendering of the same grid; byte-identical across runs.
inline std::string render_grid_svg(const GroupSchedule& schedule) {
  GroupSchedule s = schedule;
  s.normalize();
  s.validate();
  const auto labels = detail::cell_labels(s);
  const int cell = 36;
  const int w = s.w_out * cell;
  const int h = s.h_out * cell;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  for (int i = 0; i < s.h_out; ++i)
    for (int j = 0; j < s.w_out; ++j) {
      const int g = labels[static_cast<size_t>(i * s.w_out + j)];
      os << "  <rect x=\"" << j * cell << "\" y=\"" << i * cell << "\" width=\""
         << cell << "\" height=\"" << cell << "\" fill=\"" << group_color(g)
         << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
      os << "  <text x=\"" << j * cell + cell / 2 << "\" y=\"" << i * cell + cell / 2
         << "\" font-family=\"monospace\" font-size=\"12\" fill=\"#111111\""
         << " text-anchor=\"middle\" dominant-baseline=\"central\">" << g
         << "</text>\n";
    }
  os << "</svg>\n";
  return os.str();
}

struct StrategyStats {
  std::string name;
  long long duration = 0;
  long long peak_footprint = 0;
  long long load_traffic = 0;
  long long write_traffic = 0;
  bool valid = false;
};

/// Execute one schedule and collect the comparison row.
inline StrategyStats measure(const std::string& name, const GroupSchedule& schedule,
                             const LayerSpec& layer, const HardwareSpec& hw,
                             CostFlags flags = {}, int nb_data_reload = 2) {
  const Strategy strat = compile(schedule, layer, hw, name);
  StrategyStats st;
  st.name = name;
  st.valid = validate_strategy(strat, layer, hw, flags, nb_data_reload).ok();
  Machine m(layer, hw, flags);
  int index = 1;
  for (const Step& s : strat.steps) {
    const StepTrace tr = m.execute(s, index++);
    st.duration += tr.duration;
    st.peak_footprint = std::max(st.peak_footprint, tr.footprint_peak);
  }
  st.load_traffic = m.total_loads();
  st.write_traffic = m.total_writes();
  return st;
}

/// One sweep over an axis (group size or input size), several strategies per
/// axis value, plus the gain of "ilp" over the best other strategy when both
/// are present.
struct SweepResult {
  std::string axis_name = "group_size";
  std::vector<long long> axis;
  // rows[i] holds the stats of every strategy at axis[i], in insertion order
  std::vector<std::vector<StrategyStats>> rows;

  /// 100 * (best other strategy - ilp) / best other strategy, one entry per
  /// axis value; 0 when no "ilp" row exists.
  std::vector<double> gains() const {
    std::vector<double> out;
    for (const auto& row : rows) {
      long long best_other = -1;
      long long ilp = -1;
      for (const auto& st : row) {
        if (st.name == "ilp")
          ilp = st.duration;
        else if (best_other < 0 || st.duration < best_other)
          best_other = st.duration;
      }
      if (ilp < 0 || best_other <= 0)
        out.push_back(0.0);
      else
        out.push_back(100.0 * static_cast<double>(best_other - ilp) /
                      static_cast<double>(best_other));
    }
    return out;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "axis,strategy,duration,peak_footprint,load_traffic,write_traffic\n";
    for (size_t i = 0; i < rows.size(); ++i)
      for (const auto& st : rows[i])
        os << axis[i] << ',' << st.name << ',' << st.duration << ','
           << st.peak_footprint << ',' << st.load_traffic << ','
           << st.write_traffic << "\n";
    return os.str();
  }

  std::string to_table() const {
    std::ostringstream os;
    os << axis_name;
    if (!rows.empty())
      for (const auto& st : rows.front()) os << '\t' << st.name;
    os << '\n';
    for (size_t i = 0; i < rows.size(); ++i) {
      os << axis[i];
      for (const auto& st : rows[i]) os << '\t' << st.duration;
      os << '\n';
    }
    return os.str();
  }
};

}  // namespace convoff
