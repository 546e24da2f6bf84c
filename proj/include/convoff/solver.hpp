#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "convoff/ilp_model.hpp"
#include "convoff/schedule.hpp"
#include "convoff/simulator.hpp"

namespace convoff {

struct SolveBudget {
  double max_seconds = 120.0;          // whole solve; <= 0 means unlimited
  long long max_nodes = -1;            // tree-search node cap; < 0 unlimited
  double polish_after_seconds = 60.0;  // tree-search phase length
  long long polish_after_nodes = -1;   // deterministic phase switch
  long long polish_max_passes = -1;    // < 0 unlimited

  bool unlimited() const { return max_seconds <= 0 && max_nodes < 0; }
};

enum class SolveStatus { proved_optimal, feasible, timeout };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::proved_optimal: return "proved-optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::timeout: return "timeout";
  }
  return "unknown";
}

struct Solution {
  GroupSchedule schedule;
  long long objective = 0;
  SolveStatus status = SolveStatus::timeout;
  double wall_seconds = 0.0;
  long long nodes = 0;
  long long polish_passes = 0;
  long long mip_start_objective = -1;
};

/// Fast objective/feasibility oracle over ordered partitions.
///
/// Objective: t_l * (pixels loaded, counting one load per maximal run of
/// consecutive groups needing the pixel) + t_acc per nonempty group.
/// Feasibility: group sizes within the per-step patch cap, per-pixel loads
/// within the reload bound, per-step footprint within size_mem, and the
/// schedule must be faithful: no step's footprint may fully cover a patch of
/// a later group, otherwise the machine would compute it early and the
/// per-step ops budget the group bound stands for would be exceeded.
class ScheduleEvaluator {
 public:
  using Mask = boost::dynamic_bitset<>;

  ScheduleEvaluator(const LayerSpec& layer, const HardwareSpec& hw,
                    int k_groups, long long nb_patches_max, int nb_data_reload)
      : layer_(layer),
        hw_(hw),
        k_groups_(k_groups),
        nb_patches_max_(nb_patches_max),
        nb_data_reload_(nb_data_reload),
        n_pixels_(layer.n_pixels()),
        n_patches_(layer.n_patches()),
        kernel_elems_(layer.kernel_elements()) {
    windows_.reserve(static_cast<size_t>(n_patches_));
    for (int p = 0; p < n_patches_; ++p) {
      Mask m(static_cast<size_t>(n_pixels_));
      for (int px : patch_footprint_linear(p, layer)) m.set(static_cast<size_t>(px));
      windows_.push_back(std::move(m));
    }
  }

  static ScheduleEvaluator from_model(const IlpModel& m) {
    return ScheduleEvaluator(m.layer, m.hw, m.k_groups, m.nb_patches_max,
                             m.nb_data_reload);
  }

  struct Outcome {
    bool feasible = false;
    long long objective = 0;
    std::string reason;
  };

  Outcome evaluate(const std::vector<std::vector<int>>& groups) const {
    Outcome out;
    if (static_cast<int>(groups.size()) > k_groups_) {
      out.reason = "more groups than K";
      return out;
    }
    std::vector<uint8_t> load_count(static_cast<size_t>(n_pixels_), 0);
    Mask computed(static_cast<size_t>(n_patches_));
    Mask fp_prev(static_cast<size_t>(n_pixels_));
    long long loads = 0;
    long long steps = 0;
    for (const auto& g : groups) {
      if (g.empty()) continue;
      if (static_cast<long long>(g.size()) > nb_patches_max_) {
        out.reason = "group larger than the patch cap";
        return out;
      }
      Mask fp(static_cast<size_t>(n_pixels_));
      for (int p : g) fp |= windows_[static_cast<size_t>(p)];

      const long long footprint = static_cast<long long>(fp.count()) * layer_.c_in +
                                  kernel_elems_ +
                                  static_cast<long long>(g.size()) * layer_.c_out();
      if (footprint > hw_.size_mem) {
        out.reason = "footprint above size_mem";
        return out;
      }

      Mask slice = fp & ~fp_prev;
      for (size_t px = slice.find_first(); px != Mask::npos;
           px = slice.find_next(px)) {
        if (++load_count[px] > nb_data_reload_) {
          out.reason = "reload bound exceeded";
          return out;
        }
      }
      loads += static_cast<long long>(slice.count());

      // faithfulness: the fully covered, not-yet-computed patches must be
      // exactly this group
      size_t covered = 0;
      for (int p = 0; p < n_patches_; ++p) {
        if (computed.test(static_cast<size_t>(p))) continue;
        if (windows_[static_cast<size_t>(p)].is_subset_of(fp)) ++covered;
      }
      if (covered != g.size()) {
        out.reason = "step would compute a foreign patch early";
        return out;
      }
      for (int p : g) computed.set(static_cast<size_t>(p));

      ++steps;
      fp_prev = std::move(fp);
    }
    if (computed.count() != static_cast<size_t>(n_patches_)) {
      out.reason = "not a partition of the patch set";
      return out;
    }
    out.feasible = true;
    out.objective = hw_.t_l * loads + hw_.t_acc * steps;
    return out;
  }

  const Mask& window(int patch) const { return windows_[static_cast<size_t>(patch)]; }
  int n_patches() const { return n_patches_; }
  int n_pixels() const { return n_pixels_; }
  int k_groups() const { return k_groups_; }
  long long nb_patches_max() const { return nb_patches_max_; }
  int nb_data_reload() const { return nb_data_reload_; }
  const LayerSpec& layer() const { return layer_; }
  const HardwareSpec& hw() const { return hw_; }
  long long kernel_elems() const { return kernel_elems_; }

 private:
  LayerSpec layer_;
  HardwareSpec hw_;
  int k_groups_;
  long long nb_patches_max_;
  int nb_data_reload_;
  int n_pixels_;
  int n_patches_;
  long long kernel_elems_;
  std::vector<Mask> windows_;
};

namespace detail {

using Clock = std::chrono::steady_clock;

/// Depth-first search over ordered partitions, built group by group. Within a
/// group, patches are added in increasing id (groups are sets); the group
/// sequence itself is explored freely since the objective couples consecutive
/// groups. Ties are broken toward the lexicographically smallest assignment
/// vector, so nodes are pruned only when their bound is strictly worse than
/// the incumbent.
class BranchAndBound {
 public:
  using Mask = ScheduleEvaluator::Mask;

  BranchAndBound(const ScheduleEvaluator& eval, Clock::time_point start,
                 double seconds_cap, long long node_cap)
      : eval_(eval),
        start_(start),
        seconds_cap_(seconds_cap),
        node_cap_(node_cap),
        n_patches_(eval.n_patches()),
        n_pixels_(eval.n_pixels()),
        assigned_(static_cast<size_t>(n_patches_), 0),
        assign_(static_cast<size_t>(n_patches_), -1),
        computed_(static_cast<size_t>(n_patches_)),
        fp_prev_(static_cast<size_t>(n_pixels_)),
        fp_open_(static_cast<size_t>(n_pixels_)),
        needed_count_(static_cast<size_t>(n_pixels_), 0),
        load_count_(static_cast<size_t>(n_pixels_), 0) {
    for (int p = 0; p < n_patches_; ++p)
      for (size_t px = eval.window(p).find_first(); px != Mask::npos;
           px = eval.window(p).find_next(px))
        ++needed_count_[px];
    unassigned_n_ = n_patches_;
  }

  void set_incumbent(long long delta, const std::vector<int>& assign) {
    best_delta_ = delta;
    best_assign_ = assign;
    have_best_ = true;
  }

  /// Returns true if the tree was searched to completion.
  bool run() {
    dfs();
    return !aborted_;
  }

  bool have_incumbent() const { return have_best_; }
  long long best_delta() const { return best_delta_; }
  const std::vector<int>& best_assign() const { return best_assign_; }
  long long nodes() const { return nodes_; }

 private:
  bool over_budget() {
    if (node_cap_ >= 0 && nodes_ > node_cap_) return true;
    if (seconds_cap_ > 0 && (nodes_ & 1023) == 0) {
      const double el =
          std::chrono::duration<double>(Clock::now() - start_).count();
      if (el > seconds_cap_) return true;
    }
    return false;
  }

  void dfs() {
    if (aborted_) return;
    ++nodes_;
    if (over_budget()) {
      aborted_ = true;
      return;
    }

    if (unassigned_n_ == 0 && open_.empty()) {
      const long long delta = eval_.hw().t_l * loads_closed_ +
                              eval_.hw().t_acc * static_cast<long long>(closed_);
      if (!have_best_ || delta < best_delta_ ||
          (delta == best_delta_ && assign_ < best_assign_)) {
        best_delta_ = delta;
        best_assign_ = assign_;
        have_best_ = true;
      }
      return;
    }

    if (have_best_ && lower_bound() > best_delta_) return;

    // grow the open group
    if (static_cast<long long>(open_.size()) < eval_.nb_patches_max()) {
      const int from = open_.empty() ? 0 : open_.back() + 1;
      for (int p = from; p < n_patches_; ++p) {
        if (assigned_[static_cast<size_t>(p)]) continue;
        add_patch(p);
        dfs();
        undo_add(p);
        if (aborted_) return;
      }
    }

    // close the open group and start a new one
    if (!open_.empty() && closed_ + 1 <= eval_.k_groups()) {
      const long long future =
          (unassigned_n_ + eval_.nb_patches_max() - 1) / eval_.nb_patches_max();
      if (closed_ + 1 + future <= eval_.k_groups()) {
        CloseRecord rec;
        if (close_group(rec)) {
          dfs();
          undo_close(rec);
        }
      }
    }
  }

  void add_patch(int p) {
    assigned_[static_cast<size_t>(p)] = 1;
    assign_[static_cast<size_t>(p)] = closed_;
    open_.push_back(p);
    --unassigned_n_;
    const Mask& w = eval_.window(p);
    fp_open_ |= w;
    for (size_t px = w.find_first(); px != Mask::npos; px = w.find_next(px))
      --needed_count_[px];
  }

  void undo_add(int p) {
    assigned_[static_cast<size_t>(p)] = 0;
    assign_[static_cast<size_t>(p)] = -1;
    open_.pop_back();
    ++unassigned_n_;
    const Mask& w = eval_.window(p);
    for (size_t px = w.find_first(); px != Mask::npos; px = w.find_next(px))
      ++needed_count_[px];
    // rebuild the open footprint (windows of remaining members may overlap)
    fp_open_.reset();
    for (int q : open_) fp_open_ |= eval_.window(q);
  }

  struct CloseRecord {
    Mask slice;
    Mask fp_prev_before;
    std::vector<int> group;
  };

  bool close_group(CloseRecord& rec) {
    const long long footprint =
        static_cast<long long>(fp_open_.count()) * eval_.layer().c_in +
        eval_.kernel_elems() +
        static_cast<long long>(open_.size()) * eval_.layer().c_out();
    if (footprint > eval_.hw().size_mem) return false;

    // faithfulness: nothing outside the group may become fully resident
    for (int p = 0; p < n_patches_; ++p) {
      if (computed_.test(static_cast<size_t>(p))) continue;
      if (assign_[static_cast<size_t>(p)] == closed_) continue;  // group member
      if (eval_.window(p).is_subset_of(fp_open_)) return false;
    }

    rec.slice = fp_open_ & ~fp_prev_;
    for (size_t px = rec.slice.find_first(); px != Mask::npos;
         px = rec.slice.find_next(px)) {
      if (load_count_[px] + 1 > eval_.nb_data_reload()) {
        // roll back the partial count updates
        for (size_t q = rec.slice.find_first(); q != px; q = rec.slice.find_next(q))
          --load_count_[q];
        return false;
      }
      ++load_count_[px];
    }
    loads_closed_ += static_cast<long long>(rec.slice.count());
    for (int p : open_) computed_.set(static_cast<size_t>(p));
    rec.group = std::move(open_);
    open_.clear();
    rec.fp_prev_before = std::move(fp_prev_);
    fp_prev_ = fp_open_;
    fp_open_.reset();
    ++closed_;
    return true;
  }

  void undo_close(CloseRecord& rec) {
    --closed_;
    open_ = std::move(rec.group);
    fp_open_ = fp_prev_;
    fp_prev_ = std::move(rec.fp_prev_before);
    for (int p : open_) computed_.reset(static_cast<size_t>(p));
    loads_closed_ -= static_cast<long long>(rec.slice.count());
    for (size_t px = rec.slice.find_first(); px != Mask::npos;
         px = rec.slice.find_next(px))
      --load_count_[px];
  }

  /// Valid under-estimate of any completion: loads committed so far, the open
  /// group's irrevocable slice, one future load for every pixel that is
  /// needed by an unassigned patch and cannot be carried over, and t_acc for
  /// the groups that must still exist.
  long long lower_bound() {
    long long open_loads = 0;
    long long d_rem = 0;
    for (int px = 0; px < n_pixels_; ++px) {
      const auto upx = static_cast<size_t>(px);
      const bool in_open = fp_open_.test(upx);
      const bool in_prev = fp_prev_.test(upx);
      if (in_open && !in_prev) ++open_loads;
      if (needed_count_[upx] > 0 && !in_open && !in_prev) ++d_rem;
    }
    const long long spare =
        open_.empty() ? 0
                      : eval_.nb_patches_max() - static_cast<long long>(open_.size());
    const long long overflow = std::max<long long>(0, unassigned_n_ - spare);
    const long long future_groups =
        (overflow + eval_.nb_patches_max() - 1) / eval_.nb_patches_max();
    const long long steps =
        closed_ + (open_.empty() ? 0 : 1) + future_groups;
    return eval_.hw().t_l * (loads_closed_ + open_loads + d_rem) +
           eval_.hw().t_acc * steps;
  }

  const ScheduleEvaluator& eval_;
  Clock::time_point start_;
  double seconds_cap_;
  long long node_cap_;
  int n_patches_;
  int n_pixels_;

  std::vector<uint8_t> assigned_;
  std::vector<int> assign_;
  std::vector<int> open_;
  Mask computed_;
  Mask fp_prev_;
  Mask fp_open_;
  std::vector<int> needed_count_;
  std::vector<uint8_t> load_count_;
  long long loads_closed_ = 0;
  int closed_ = 0;
  int unassigned_n_ = 0;

  bool have_best_ = false;
  long long best_delta_ = 0;
  std::vector<int> best_assign_;
  long long nodes_ = 0;
  bool aborted_ = false;
};

inline std::vector<std::vector<int>> assign_to_groups(const std::vector<int>& assign) {
  int k = 0;
  for (int g : assign) k = std::max(k, g + 1);
  std::vector<std::vector<int>> groups(static_cast<size_t>(k));
  for (int p = 0; p < static_cast<int>(assign.size()); ++p)
    groups[static_cast<size_t>(assign[static_cast<size_t>(p)])].push_back(p);
  return groups;
}

inline std::vector<int> groups_to_assign(const std::vector<std::vector<int>>& groups,
                                         int n_patches) {
  std::vector<int> assign(static_cast<size_t>(n_patches), -1);
  for (int k = 0; k < static_cast<int>(groups.size()); ++k)
    for (int p : groups[static_cast<size_t>(k)]) assign[static_cast<size_t>(p)] = k;
  return assign;
}

/// Serpentine stripe schedules, used as built-in primal candidates: vertical
/// (or horizontal) bands of `width` patch columns (rows), walked boustrophedon
/// so consecutive groups always share a window border.
inline std::vector<std::vector<int>> stripe_schedule(const LayerSpec& layer, int width,
                                                     bool column_bands) {
  const int h = layer.h_out();
  const int w = layer.w_out();
  std::vector<std::vector<int>> groups;
  if (column_bands) {
    const int bands = (w + width - 1) / width;
    for (int b = 0; b < bands; ++b) {
      const int j0 = b * width;
      const int j1 = std::min(w, j0 + width);
      for (int r = 0; r < h; ++r) {
        const int i = (b % 2 == 0) ? r : h - 1 - r;
        std::vector<int> g;
        for (int j = j0; j < j1; ++j) g.push_back(i * w + j);
        groups.push_back(std::move(g));
      }
    }
  } else {
    const int bands = (h + width - 1) / width;
    for (int b = 0; b < bands; ++b) {
      const int i0 = b * width;
      const int i1 = std::min(h, i0 + width);
      for (int c = 0; c < w; ++c) {
        const int j = (b % 2 == 0) ? c : w - 1 - c;
        std::vector<int> g;
        for (int i = i0; i < i1; ++i) g.push_back(i * w + j);
        groups.push_back(std::move(g));
      }
    }
  }
  return groups;
}

/// First-improvement hill climbing over: moving one patch between groups,
/// swapping two patches across groups, reversing a run of groups, and
/// relocating one group. Empty groups left by a move are dropped.
class Polisher {
 public:
  Polisher(const ScheduleEvaluator& eval, Clock::time_point start, double seconds_cap,
           long long max_passes)
      : eval_(eval), start_(start), seconds_cap_(seconds_cap), max_passes_(max_passes) {}

  long long passes() const { return passes_; }

  void polish(std::vector<std::vector<int>>& groups, long long& delta) {
    bool improved = true;
    while (improved && !out_of_budget()) {
      improved = false;
      ++passes_;
      if (max_passes_ >= 0 && passes_ > max_passes_) break;

      const int n = static_cast<int>(groups.size());
      // move one patch
      for (int a = 0; a < n && !improved; ++a)
        for (size_t pi = 0; pi < groups[static_cast<size_t>(a)].size() && !improved;
             ++pi)
          for (int b = 0; b < n && !improved; ++b) {
            if (b == a) continue;
            if (static_cast<long long>(groups[static_cast<size_t>(b)].size()) >=
                eval_.nb_patches_max())
              continue;
            auto cand = groups;
            const int p = cand[static_cast<size_t>(a)][pi];
            cand[static_cast<size_t>(a)].erase(cand[static_cast<size_t>(a)].begin() +
                                               static_cast<long>(pi));
            insert_sorted(cand[static_cast<size_t>(b)], p);
            improved = try_accept(groups, delta, cand);
            if (out_of_budget()) return;
          }
      if (improved) continue;

      // swap two patches across groups
      for (int a = 0; a < n && !improved; ++a)
        for (int b = a + 1; b < n && !improved; ++b)
          for (size_t pi = 0; pi < groups[static_cast<size_t>(a)].size() && !improved;
               ++pi)
            for (size_t qi = 0; qi < groups[static_cast<size_t>(b)].size() && !improved;
                 ++qi) {
              auto cand = groups;
              std::swap(cand[static_cast<size_t>(a)][pi],
                        cand[static_cast<size_t>(b)][qi]);
              std::sort(cand[static_cast<size_t>(a)].begin(),
                        cand[static_cast<size_t>(a)].end());
              std::sort(cand[static_cast<size_t>(b)].begin(),
                        cand[static_cast<size_t>(b)].end());
              improved = try_accept(groups, delta, cand);
              if (out_of_budget()) return;
            }
      if (improved) continue;

      // reverse a run of groups
      for (int a = 0; a < n && !improved; ++a)
        for (int b = a + 1; b < n && !improved; ++b) {
          auto cand = groups;
          std::reverse(cand.begin() + a, cand.begin() + b + 1);
          improved = try_accept(groups, delta, cand);
          if (out_of_budget()) return;
        }
      if (improved) continue;

      // relocate one group
      for (int a = 0; a < n && !improved; ++a)
        for (int b = 0; b < n && !improved; ++b) {
          if (a == b) continue;
          auto cand = groups;
          auto g = cand[static_cast<size_t>(a)];
          cand.erase(cand.begin() + a);
          cand.insert(cand.begin() + b, std::move(g));
          improved = try_accept(groups, delta, cand);
          if (out_of_budget()) return;
        }
    }
  }

 private:
  static void insert_sorted(std::vector<int>& v, int p) {
    v.insert(std::upper_bound(v.begin(), v.end(), p), p);
  }

  bool out_of_budget() {
    if (seconds_cap_ <= 0) return false;
    if ((++checks_ & 255) != 0) return false;
    return std::chrono::duration<double>(Clock::now() - start_).count() > seconds_cap_;
  }

  bool try_accept(std::vector<std::vector<int>>& groups, long long& delta,
                  std::vector<std::vector<int>>& cand) {
    cand.erase(std::remove_if(cand.begin(), cand.end(),
                              [](const std::vector<int>& g) { return g.empty(); }),
               cand.end());
    const auto out = eval_.evaluate(cand);
    if (out.feasible && out.objective < delta) {
      groups = std::move(cand);
      delta = out.objective;
      return true;
    }
    return false;
  }

  const ScheduleEvaluator& eval_;
  Clock::time_point start_;
  double seconds_cap_;
  long long max_passes_;
  long long passes_ = 0;
  long long checks_ = 0;
};

}  // namespace detail

/// Exact-by-search solver with heuristic warm starts and a polishing phase.
///
/// The incumbent is seeded from the caller's MIP start (must be feasible for
/// the model) plus built-in primal candidates (row-by-row, zigzag and stripe
/// serpentines at the model's patch cap). The tree search runs until its
/// phase budget ends, then hill climbing improves the incumbent until the
/// overall budget is spent. The returned objective is verified against the
/// executed schedule's duration (write-backs and kernel preload excluded).
inline Solution solve(const IlpModel& model,
                      const std::optional<GroupSchedule>& mip_start,
                      const SolveBudget& budget = {}) {
  const auto start = detail::Clock::now();
  const ScheduleEvaluator eval = ScheduleEvaluator::from_model(model);

  bool have_best = false;
  long long best_delta = 0;
  std::vector<int> best_assign;
  long long mip_obj = -1;

  auto offer = [&](const std::vector<std::vector<int>>& groups) -> long long {
    const auto out = eval.evaluate(groups);
    if (!out.feasible) return -1;
    std::vector<int> assign = detail::groups_to_assign(groups, eval.n_patches());
    if (!have_best || out.objective < best_delta ||
        (out.objective == best_delta && assign < best_assign)) {
      best_delta = out.objective;
      best_assign = std::move(assign);
      have_best = true;
    }
    return out.objective;
  };

  if (mip_start) {
    GroupSchedule s = *mip_start;
    s.normalize();
    const auto x = schedule_to_mip_start(s, model);
    const auto bad = model.check_assignment(x);
    mip_obj = offer(s.groups);
    if (mip_obj < 0 || !bad.empty())
      throw std::invalid_argument("solve: MIP start is infeasible for the model" +
                                  (bad.empty() ? std::string()
                                               : " (" + bad.front() + ")"));
  }

  // built-in primal candidates
  const int cap = static_cast<int>(
      std::min<long long>(model.nb_patches_max, model.layer.n_patches()));
  offer(gen_row_by_row(model.layer, cap).groups);
  offer(gen_zigzag(model.layer, cap).groups);
  for (int w = 1; w <= cap; ++w) {
    offer(detail::stripe_schedule(model.layer, w, true));
    offer(detail::stripe_schedule(model.layer, w, false));
  }

  const double bb_seconds =
      budget.max_seconds <= 0
          ? budget.polish_after_seconds
          : std::min(budget.polish_after_seconds, budget.max_seconds);
  long long bb_nodes = budget.max_nodes;
  if (budget.polish_after_nodes >= 0)
    bb_nodes = bb_nodes < 0 ? budget.polish_after_nodes
                            : std::min(bb_nodes, budget.polish_after_nodes);

  detail::BranchAndBound bb(eval, start, budget.unlimited() ? 0.0 : bb_seconds,
                            bb_nodes);
  if (have_best) bb.set_incumbent(best_delta, best_assign);
  const bool closed = bb.run();
  if (bb.have_incumbent()) {
    best_delta = bb.best_delta();
    best_assign = bb.best_assign();
    have_best = true;
  }

  Solution sol;
  sol.nodes = bb.nodes();
  sol.mip_start_objective = mip_obj;

  if (closed && !have_best)
    throw InfeasibleError("no assignment satisfies the model constraints");

  if (!have_best) {
    sol.status = SolveStatus::timeout;
    sol.wall_seconds = std::chrono::duration<double>(detail::Clock::now() - start).count();
    return sol;
  }

  auto groups = detail::assign_to_groups(best_assign);
  if (!closed) {
    detail::Polisher polisher(eval, start, budget.max_seconds,
                              budget.polish_max_passes);
    polisher.polish(groups, best_delta);
    sol.polish_passes = polisher.passes();
  }

  sol.schedule.h_out = model.layer.h_out();
  sol.schedule.w_out = model.layer.w_out();
  sol.schedule.groups = std::move(groups);
  sol.schedule.normalize();
  sol.objective = best_delta;
  sol.status = closed ? SolveStatus::proved_optimal : SolveStatus::feasible;
  sol.wall_seconds = std::chrono::duration<double>(detail::Clock::now() - start).count();

  // the reported objective must be what the executed schedule costs
  const Strategy strat = compile(sol.schedule, model.layer, model.hw, "ilp");
  const long long executed =
      strategy_duration(strat, model.layer, model.hw, objective_cost_flags());
  if (executed != sol.objective)
    throw std::logic_error("solver objective " + std::to_string(sol.objective) +
                           " disagrees with executed duration " +
                           std::to_string(executed));
  return sol;
}

/// Exhaustive oracle: every ordered partition of the patch set into at most K
/// groups of at most max_patches patches, each compiled and costed through
/// the step executor (write-backs and kernel preload excluded). Partitions
/// the machine rejects, that breach the reload bound, or that compute a
/// foreign patch early are discarded.
inline Solution brute_force_optimum(const LayerSpec& layer, const HardwareSpec& hw,
                                    int k_groups, long long max_patches,
                                    int nb_data_reload = 2) {
  layer.validate();
  hw.validate();
  const int x = layer.n_patches();
  if (x > 9)
    throw InstanceTooLarge("brute force limited to 9 patches, got " +
                           std::to_string(x));

  const auto start = detail::Clock::now();
  std::vector<std::vector<int>> groups;
  bool have_best = false;
  long long best_delta = 0;
  std::vector<int> best_assign;
  std::vector<std::vector<int>> best_groups;
  long long visited = 0;

  const CostFlags flags = objective_cost_flags();

  auto consider = [&]() {
    ++visited;
    GroupSchedule s;
    s.h_out = layer.h_out();
    s.w_out = layer.w_out();
    s.groups = groups;
    Strategy strat;
    try {
      strat = compile(s, layer, hw, "oracle");
    } catch (const SimError&) {
      return;  // capacity or ops bound
    }
    Machine m(layer, hw, flags, nullptr, nullptr, /*collect=*/true);
    long long delta = 0;
    int index = 1;
    for (const Step& st : strat.steps) {
      const StepTrace tr = m.execute(st, index);
      // every step must compute exactly its own group
      if (index <= static_cast<int>(groups.size())) {
        if (tr.computed_positions != groups[static_cast<size_t>(index - 1)]) return;
      } else if (!tr.computed_positions.empty()) {
        return;
      }
      delta += tr.duration;
      ++index;
    }
    if (!m.violations().empty()) return;
    if (!m.memory().empty()) return;
    for (int px = 0; px < layer.n_pixels(); ++px)
      if (m.pixel_load_count(px) > nb_data_reload) return;

    std::vector<int> assign = detail::groups_to_assign(groups, x);
    if (!have_best || delta < best_delta ||
        (delta == best_delta && assign < best_assign)) {
      have_best = true;
      best_delta = delta;
      best_assign = std::move(assign);
      best_groups = groups;
    }
  };

  std::vector<int> remaining;
  for (int p = 0; p < x; ++p) remaining.push_back(p);

  // enumerate ordered partitions: pick the next group as any admissible
  // subset of the remaining patches
  auto rec = [&](auto&& self, std::vector<int> rest, int groups_left) -> void {
    if (rest.empty()) {
      consider();
      return;
    }
    if (groups_left == 0) return;
    const long long need =
        (static_cast<long long>(rest.size()) + max_patches - 1) / max_patches;
    if (need > groups_left) return;
    const int n = static_cast<int>(rest.size());
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      if (static_cast<long long>(__builtin_popcount(mask)) > max_patches) continue;
      std::vector<int> g, rem;
      for (int b = 0; b < n; ++b)
        (mask & (1u << b) ? g : rem).push_back(rest[static_cast<size_t>(b)]);
      groups.push_back(std::move(g));
      self(self, std::move(rem), groups_left - 1);
      groups.pop_back();
    }
  };
  rec(rec, std::move(remaining), k_groups);

  if (!have_best) throw InfeasibleError("brute force: no valid partition");

  Solution sol;
  sol.schedule.h_out = layer.h_out();
  sol.schedule.w_out = layer.w_out();
  sol.schedule.groups = best_groups;
  sol.schedule.normalize();
  sol.objective = best_delta;
  sol.status = SolveStatus::proved_optimal;
  sol.nodes = visited;
  sol.wall_seconds = std::chrono::duration<double>(detail::Clock::now() - start).count();
  return sol;
}

}  // namespace convoff
