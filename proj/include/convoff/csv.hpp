#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "convoff/errors.hpp"
#include "convoff/schedule.hpp"

namespace convoff {
namespace detail {
inline std::string trim_csv(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

/// Schedule interchange format, the solver-to-simulator handoff:
///   step,patch_ids
///   1,0;1
///   2,2;3
/// Patch ids are row-major (i * W_out + j); steps are 1-based and
/// consecutive. UTF-8, LF line endings.
inline std::string write_schedule_csv(const GroupSchedule& schedule) {
  GroupSchedule s = schedule;
  s.normalize();
  std::ostringstream os;
  os << "step,patch_ids\n";
  for (size_t k = 0; k < s.groups.size(); ++k) {
    os << (k + 1) << ',';
    const auto& g = s.groups[k];
    for (size_t i = 0; i < g.size(); ++i) {
      if (i) os << ';';
      os << g[i];
    }
    os << '\n';
  }
  return os.str();
}

inline GroupSchedule parse_schedule_csv(const std::string& text,
                                        const LayerSpec& layer) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || detail::trim_csv(line) != "step,patch_ids")
    throw ParseError("schedule CSV: missing 'step,patch_ids' header");

  GroupSchedule s;
  s.h_out = layer.h_out();
  s.w_out = layer.w_out();
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    const std::string t = detail::trim_csv(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos)
      throw ParseError("schedule CSV row " + std::to_string(row) +
                       ": expected 'step,patch_ids'");
    const std::string step_s = t.substr(0, comma);
    long long step = 0;
    try {
      size_t pos = 0;
      step = std::stoll(step_s, &pos);
      if (pos != step_s.size()) throw std::invalid_argument(step_s);
    } catch (const std::exception&) {
      throw ParseError("schedule CSV row " + std::to_string(row) +
                       ": bad step index '" + step_s + "'");
    }
    if (step != static_cast<long long>(s.groups.size()) + 1)
      throw ParseError("schedule CSV row " + std::to_string(row) +
                       ": steps must be consecutive from 1");

    std::vector<int> group;
    std::istringstream ids(t.substr(comma + 1));
    std::string id;
    while (std::getline(ids, id, ';')) {
      long long v = 0;
      try {
        size_t pos = 0;
        v = std::stoll(id, &pos);
        if (pos != id.size()) throw std::invalid_argument(id);
      } catch (const std::exception&) {
        throw ParseError("schedule CSV row " + std::to_string(row) +
                         ": bad patch id '" + id + "'");
      }
      if (v < 0 || v >= layer.n_patches())
        throw ParseError("schedule CSV row " + std::to_string(row) + ": patch id " +
                         std::to_string(v) + " out of range [0, " +
                         std::to_string(layer.n_patches()) + ")");
      group.push_back(static_cast<int>(v));
    }
    if (group.empty())
      throw ParseError("schedule CSV row " + std::to_string(row) + ": empty group");
    s.groups.push_back(std::move(group));
  }
  s.normalize();
  return s;
}

inline GroupSchedule load_schedule_csv(const std::string& path,
                                       const LayerSpec& layer) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schedule CSV '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schedule_csv(buf.str(), layer);
}

}  // namespace convoff
