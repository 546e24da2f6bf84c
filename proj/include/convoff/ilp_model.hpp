#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "convoff/hardware.hpp"
#include "convoff/patch.hpp"
#include "convoff/schedule.hpp"

namespace convoff {

/// 0/1 program over an ordered grouping of patches.
///
/// Binary variables, for k in [0, K):
///   P_g[i,k]      patch i assigned to group k
///   pxl_g[j,k]    pixel j needed by group k (OR of the covering patches)
///   pxl_ovlp[j,k] pixel j needed by both group k-1 and group k
///   pxl_I[j,k]    pixel j loaded at step k (needed and not carried over)
/// Pixel indices j range over the 2D spatial grid (channels are never split).
/// Group sizes, slice sizes and the memory bound are linear expressions over
/// these variables; the overlap count per step is reported as a metric only.
class IlpModel {
 public:
  struct Term {
    int var;
    long long coef;
  };
  struct Constraint {
    std::string name;
    std::vector<Term> terms;
    char sense;  // 'L' (<=), 'E' (==)
    long long rhs;
  };

  LayerSpec layer;
  HardwareSpec hw;
  int k_groups = 1;
  int nb_data_reload = 2;
  long long nb_patches_max = 1;
  int n_pixels = 0;
  int n_patches = 0;
  std::vector<std::pair<int, int>> pxl_in_p;       // (patch id, pixel id)
  std::vector<std::vector<int>> pixels_of_patch;   // patch -> pixels
  std::vector<std::vector<int>> patches_of_pixel;  // pixel -> patches
  std::vector<Constraint> constraints;
  std::vector<Term> objective;       // t_l * sum pxl_I
  long long objective_constant = 0;  // K * t_acc

  int var_count() const { return k_groups * (3 * n_pixels + n_patches); }

  // variable layout: [P_g | pxl_g | pxl_ovlp | pxl_I], k-major inside each block
  int pg(int i, int k) const { return i * k_groups + k; }
  int pxlg(int j, int k) const { return n_patches * k_groups + j * k_groups + k; }
  int ovlp(int j, int k) const {
    return (n_patches + n_pixels) * k_groups + j * k_groups + k;
  }
  int pxli(int j, int k) const {
    return (n_patches + 2 * n_pixels) * k_groups + j * k_groups + k;
  }

  std::string var_name(int v) const {
    const int block0 = n_patches * k_groups;
    const int block1 = block0 + n_pixels * k_groups;
    const int block2 = block1 + n_pixels * k_groups;
    if (v < block0)
      return "Pg_" + std::to_string(v / k_groups) + "_" + std::to_string(v % k_groups);
    if (v < block1) {
      const int r = v - block0;
      return "pxlg_" + std::to_string(r / k_groups) + "_" +
             std::to_string(r % k_groups);
    }
    if (v < block2) {
      const int r = v - block1;
      return "ovlp_" + std::to_string(r / k_groups) + "_" +
             std::to_string(r % k_groups);
    }
    const int r = v - block2;
    return "pxlI_" + std::to_string(r / k_groups) + "_" + std::to_string(r % k_groups);
  }

  /// Values of all constraints under a full 0/1 assignment; returns the names
  /// of violated ones.
  std::vector<std::string> check_assignment(const std::vector<uint8_t>& x) const {
    std::vector<std::string> bad;
    if (static_cast<int>(x.size()) != var_count()) {
      bad.push_back("assignment size mismatch");
      return bad;
    }
    for (const Constraint& c : constraints) {
      long long lhs = 0;
      for (const Term& t : c.terms) lhs += t.coef * x[static_cast<size_t>(t.var)];
      const bool ok = c.sense == 'E' ? lhs == c.rhs : lhs <= c.rhs;
      if (!ok) bad.push_back(c.name);
    }
    return bad;
  }

  long long objective_value(const std::vector<uint8_t>& x) const {
    long long v = objective_constant;
    for (const Term& t : objective) v += t.coef * x[static_cast<size_t>(t.var)];
    return v;
  }

  /// Pixels shared by steps k-1 and k under an assignment (reported metric).
  long long nb_pxl_ovlp(const std::vector<uint8_t>& x, int k) const {
    long long v = 0;
    for (int j = 0; j < n_pixels; ++j) v += x[static_cast<size_t>(ovlp(j, k))];
    return v;
  }
};

inline IlpModel build_model(const LayerSpec& layer, const HardwareSpec& hw, int k_groups,
                            int nb_data_reload = 2,
                            long long nb_patches_max_override = 0) {
  layer.validate();
  hw.validate();
  if (k_groups < 1) throw ShapeError("build_model: K must be >= 1");

  IlpModel m;
  m.layer = layer;
  m.hw = hw;
  m.k_groups = k_groups;
  m.nb_data_reload = nb_data_reload;
  m.nb_patches_max = s1_params(layer, hw, nb_patches_max_override).nb_patches_max;
  m.n_pixels = layer.n_pixels();
  m.n_patches = layer.n_patches();
  m.pixels_of_patch = footprints_by_patch(layer);
  m.patches_of_pixel = patches_by_pixel(layer);
  for (int p = 0; p < m.n_patches; ++p)
    for (int px : m.pixels_of_patch[static_cast<size_t>(p)])
      m.pxl_in_p.emplace_back(p, px);

  const int K = k_groups;
  auto add = [&m](std::string name, std::vector<IlpModel::Term> terms, char sense,
                  long long rhs) {
    m.constraints.push_back({std::move(name), std::move(terms), sense, rhs});
  };

  // each patch in exactly one group
  for (int i = 0; i < m.n_patches; ++i) {
    std::vector<IlpModel::Term> t;
    for (int k = 0; k < K; ++k) t.push_back({m.pg(i, k), 1});
    add("assign_" + std::to_string(i), std::move(t), 'E', 1);
  }

  // group cardinality bound
  for (int k = 0; k < K; ++k) {
    std::vector<IlpModel::Term> t;
    for (int i = 0; i < m.n_patches; ++i) t.push_back({m.pg(i, k), 1});
    add("groupsize_" + std::to_string(k), std::move(t), 'L', m.nb_patches_max);
  }

  // pxl_g = OR of the covering patches' assignments
  for (int j = 0; j < m.n_pixels; ++j) {
    const auto& covering = m.patches_of_pixel[static_cast<size_t>(j)];
    for (int k = 0; k < K; ++k) {
      for (int i : covering)
        add("or_lb_" + std::to_string(j) + "_" + std::to_string(k) + "_" +
                std::to_string(i),
            {{m.pg(i, k), 1}, {m.pxlg(j, k), -1}}, 'L', 0);
      std::vector<IlpModel::Term> ub;
      ub.push_back({m.pxlg(j, k), 1});
      for (int i : covering) ub.push_back({m.pg(i, k), -1});
      add("or_ub_" + std::to_string(j) + "_" + std::to_string(k), std::move(ub), 'L',
          0);
    }
  }

  // pxl_ovlp = pxl_g[k] AND pxl_g[k-1]; the first step has no predecessor
  for (int j = 0; j < m.n_pixels; ++j) {
    add("ovlp0_" + std::to_string(j), {{m.ovlp(j, 0), 1}}, 'E', 0);
    for (int k = 1; k < K; ++k) {
      const std::string s = std::to_string(j) + "_" + std::to_string(k);
      add("and_a_" + s, {{m.ovlp(j, k), 1}, {m.pxlg(j, k), -1}}, 'L', 0);
      add("and_b_" + s, {{m.ovlp(j, k), 1}, {m.pxlg(j, k - 1), -1}}, 'L', 0);
      add("and_c_" + s,
          {{m.pxlg(j, k), 1}, {m.pxlg(j, k - 1), 1}, {m.ovlp(j, k), -1}}, 'L', 1);
    }
  }

  // pxl_I = pxl_g AND NOT pxl_ovlp
  for (int j = 0; j < m.n_pixels; ++j)
    for (int k = 0; k < K; ++k) {
      const std::string s = std::to_string(j) + "_" + std::to_string(k);
      add("load_a_" + s, {{m.pxli(j, k), 1}, {m.pxlg(j, k), -1}}, 'L', 0);
      add("load_b_" + s, {{m.pxli(j, k), 1}, {m.ovlp(j, k), 1}}, 'L', 1);
      add("load_c_" + s,
          {{m.pxlg(j, k), 1}, {m.ovlp(j, k), -1}, {m.pxli(j, k), -1}}, 'L', 0);
    }

  // bounded reloads per pixel
  for (int j = 0; j < m.n_pixels; ++j) {
    std::vector<IlpModel::Term> t;
    for (int k = 0; k < K; ++k) t.push_back({m.pxli(j, k), 1});
    add("reload_" + std::to_string(j), std::move(t), 'L', nb_data_reload);
  }

  // on-chip capacity per step, in scalar elements: the group's pixels carry
  // C_in channels each, all kernels stay resident, and each patch of the
  // group holds C_out freshly computed outputs
  const long long kernel_elems = layer.kernel_elements();
  for (int k = 0; k < K; ++k) {
    std::vector<IlpModel::Term> t;
    for (int j = 0; j < m.n_pixels; ++j) t.push_back({m.pxlg(j, k), layer.c_in});
    for (int i = 0; i < m.n_patches; ++i) t.push_back({m.pg(i, k), layer.c_out()});
    add("mem_" + std::to_string(k), std::move(t), 'L', hw.size_mem - kernel_elems);
  }

  // objective: t_l * total loaded pixels + K * t_acc
  for (int j = 0; j < m.n_pixels; ++j)
    for (int k = 0; k < K; ++k) m.objective.push_back({m.pxli(j, k), hw.t_l});
  m.objective_constant = static_cast<long long>(K) * hw.t_acc;
  return m;
}

/// Full variable assignment encoding a schedule (exact boolean semantics of
/// the derived variables). Groups beyond the schedule's tail stay empty.
inline std::vector<uint8_t> schedule_to_mip_start(const GroupSchedule& schedule,
                                                  const IlpModel& m) {
  GroupSchedule s = schedule;
  s.normalize();
  s.validate();
  if (static_cast<int>(s.groups.size()) > m.k_groups)
    throw ShapeError("schedule_to_mip_start: schedule has more groups than K");

  std::vector<uint8_t> x(static_cast<size_t>(m.var_count()), 0);
  for (int k = 0; k < static_cast<int>(s.groups.size()); ++k)
    for (int p : s.groups[static_cast<size_t>(k)])
      x[static_cast<size_t>(m.pg(p, k))] = 1;

  for (int j = 0; j < m.n_pixels; ++j)
    for (int k = 0; k < m.k_groups; ++k) {
      uint8_t g = 0;
      for (int i : m.patches_of_pixel[static_cast<size_t>(j)])
        g |= x[static_cast<size_t>(m.pg(i, k))];
      x[static_cast<size_t>(m.pxlg(j, k))] = g;
    }
  for (int j = 0; j < m.n_pixels; ++j)
    for (int k = 0; k < m.k_groups; ++k) {
      const uint8_t g = x[static_cast<size_t>(m.pxlg(j, k))];
      const uint8_t o =
          k == 0 ? 0
                 : static_cast<uint8_t>(g & x[static_cast<size_t>(m.pxlg(j, k - 1))]);
      x[static_cast<size_t>(m.ovlp(j, k))] = o;
      x[static_cast<size_t>(m.pxli(j, k))] = static_cast<uint8_t>(g & !o);
    }
  return x;
}

/// Read the groups back from an assignment; empty groups are dropped.
inline GroupSchedule assignment_to_schedule(const std::vector<uint8_t>& x,
                                            const IlpModel& m) {
  GroupSchedule s;
  s.h_out = m.layer.h_out();
  s.w_out = m.layer.w_out();
  s.groups.assign(static_cast<size_t>(m.k_groups), {});
  for (int i = 0; i < m.n_patches; ++i)
    for (int k = 0; k < m.k_groups; ++k)
      if (x[static_cast<size_t>(m.pg(i, k))])
        s.groups[static_cast<size_t>(k)].push_back(i);
  s.normalize();
  return s;
}

/// CPLEX LP text format, for cross-checks with external solvers.
inline void write_lp(const IlpModel& m, std::ostream& os) {
  os << "\\ convolution offload grouping, K=" << m.k_groups
     << ", patches=" << m.n_patches << ", pixels=" << m.n_pixels << "\n";
  os << "Minimize\n obj:";
  int line = 5;
  auto emit = [&os, &line](const std::string& piece) {
    if (line + static_cast<int>(piece.size()) > 240) {
      os << "\n   ";
      line = 3;
    }
    os << piece;
    line += static_cast<int>(piece.size());
  };
  for (const auto& t : m.objective)
    emit(" + " + std::to_string(t.coef) + " " + m.var_name(t.var));
  if (m.objective_constant != 0) emit(" + " + std::to_string(m.objective_constant));
  os << "\nSubject To\n";
  for (const auto& c : m.constraints) {
    os << " " << c.name << ":";
    line = static_cast<int>(c.name.size()) + 2;
    for (const auto& t : c.terms) {
      std::string piece = t.coef >= 0 ? " + " : " - ";
      piece += std::to_string(t.coef >= 0 ? t.coef : -t.coef) + " " +
               m.var_name(t.var);
      emit(piece);
    }
    os << (c.sense == 'E' ? " = " : " <= ") << c.rhs << "\n";
  }
  os << "Binaries\n";
  for (int v = 0; v < m.var_count(); ++v) os << " " << m.var_name(v) << "\n";
  os << "End\n";
}

}  // namespace convoff
