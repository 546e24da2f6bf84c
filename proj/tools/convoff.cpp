// Command-line front end: simulate, generate, optimize, compare, verify.
//
// Exit codes: 0 success, 2 validation failure, 3 numeric mismatch,
// 4 infeasible or timeout without incumbent, 5 I/O or parse error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "convoff/config.hpp"
#include "convoff/csv.hpp"
#include "convoff/report.hpp"
#include "convoff/solver.hpp"

namespace {

using namespace convoff;

constexpr int kExitValidation = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitParse = 5;

struct CliError {
  int code;
  std::string message;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitParse, "cannot write '" + path + "'"};
  out << content;
}

GroupSchedule generator_schedule(const std::string& name, const LayerSpec& layer,
                                 int group_size, long long cap) {
  if (name != "s1-baseline" && (group_size < 1 || group_size > cap))
    throw CliError{kExitValidation,
                   "group_size " + std::to_string(group_size) +
                       " outside [1, nb_patches_max=" + std::to_string(cap) + "]"};
  if (name == "rowbyrow") return gen_row_by_row(layer, group_size);
  if (name == "zigzag") return gen_zigzag(layer, group_size);
  if (name == "s1-baseline") return gen_s1_baseline(layer);
  throw CliError{kExitParse, "unknown strategy '" + name + "'"};
}

GroupSchedule schedule_from_config(const ExperimentConfig& cfg, const LayerSpec& layer,
                                   long long cap) {
  cfg.require_one_source();
  if (!cfg.strategy_csv.empty()) return load_schedule_csv(cfg.strategy_csv, layer);
  return generator_schedule(cfg.strategy, layer, cfg.group_size, cap);
}

double solver_budget(const ExperimentConfig& cfg, double flag_value) {
  double budget = flag_value >= 0 ? flag_value : cfg.solver_budget_seconds;
  if (const char* env = std::getenv("CONVOFF_SOLVER_BUDGET")) {
    try {
      budget = std::stod(env);
    } catch (const std::exception&) {
      throw CliError{kExitParse,
                     "CONVOFF_SOLVER_BUDGET is not a number: " + std::string(env)};
    }
  }
  return budget;
}

void print_metrics(const Metrics& metrics) {
  std::cout << "duration_cycles " << metrics.total_duration << "\n";
  std::cout << "peak_footprint_elements " << metrics.peak_footprint << "\n";
  std::cout << "load_traffic_pixels " << metrics.load_traffic << "\n";
  std::cout << "kernel_loads " << metrics.kernel_loads << "\n";
  std::cout << "write_traffic_positions " << metrics.write_traffic << "\n";
  std::cout << "step i_slice w k_sub footprint delta\n";
  for (const StepTrace& t : metrics.traces)
    std::cout << t.index << ' ' << t.loaded_pixels << ' ' << t.written_positions
              << ' ' << t.loaded_kernels << ' ' << t.footprint_after << ' '
              << t.duration << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& trace_path) {
  const ExperimentConfig cfg = load_config_file(config_path);
  const LayerSpec layer = cfg.layer();
  const HardwareSpec hw = cfg.hardware();
  const long long cap = s1_params(layer, hw, cfg.nb_patches_max).nb_patches_max;
  const GroupSchedule schedule = schedule_from_config(cfg, layer, cap);
  const Strategy strat = compile(schedule, layer, hw,
                                 cfg.strategy.empty() ? "csv" : cfg.strategy);

  const ValidationReport report =
      validate_strategy(strat, layer, hw, cfg.cost_flags(), cfg.nb_data_reload);
  for (const Violation& v : report.violations)
    std::cerr << "violation: " << to_string(v.kind) << " at step " << v.step << ": "
              << v.detail << "\n";

  auto [input, kernels] = cfg.make_tensors();
  auto [output, metrics] =
      run_and_verify(strat, input, kernels, layer, hw, cfg.cost_flags());
  (void)output;
  print_metrics(metrics);
  if (!trace_path.empty()) write_file(trace_path, traces_to_jsonl(metrics.traces));
  if (!report.ok()) return kExitValidation;
  return 0;
}

int cmd_generate(const std::string& config_path, const std::string& name,
                 int group_size, const std::string& out_path) {
  const ExperimentConfig cfg = load_config_file(config_path);
  const LayerSpec layer = cfg.layer();
  const HardwareSpec hw = cfg.hardware();
  const long long cap = s1_params(layer, hw, cfg.nb_patches_max).nb_patches_max;
  const int gs = group_size > 0 ? group_size : cfg.group_size;
  const GroupSchedule schedule = generator_schedule(name, layer, gs, cap);
  write_file(out_path, write_schedule_csv(schedule));
  std::cout << "wrote " << schedule.groups.size() << " groups to " << out_path << "\n";
  return 0;
}

int cmd_optimize(const std::string& config_path, const std::string& k_arg,
                 double budget_flag, const std::string& out_path,
                 std::string summary_path) {
  const ExperimentConfig cfg = load_config_file(config_path);
  const LayerSpec layer = cfg.layer();
  const HardwareSpec hw = cfg.hardware();
  const S1Params params = s1_params(layer, hw, cfg.nb_patches_max);

  long long k = params.k_min;
  if (k_arg != "kmin") {
    try {
      k = std::stoll(k_arg);
    } catch (const std::exception&) {
      throw CliError{kExitParse, "--k expects 'kmin' or an integer"};
    }
    if (k < params.k_min || k > params.k_max)
      throw CliError{kExitValidation,
                     "--k " + std::to_string(k) + " outside [K_min=" +
                         std::to_string(params.k_min) + ", K_max=" +
                         std::to_string(params.k_max) + "]"};
    if (k > params.k_min)
      std::cerr << "note: K above K_min enlarges the search space sharply\n";
  }

  const IlpModel model = build_model(layer, hw, static_cast<int>(k),
                                     cfg.nb_data_reload, cfg.nb_patches_max);

  // warm start: the better of the two heuristics at the patch cap
  const int cap = static_cast<int>(std::min<long long>(params.nb_patches_max,
                                                       layer.n_patches()));
  const CostFlags obj_flags = objective_cost_flags();
  const GroupSchedule row = gen_row_by_row(layer, cap);
  const GroupSchedule zig = gen_zigzag(layer, cap);
  const long long d_row =
      strategy_duration(compile(row, layer, hw, "rowbyrow"), layer, hw, obj_flags);
  const long long d_zig =
      strategy_duration(compile(zig, layer, hw, "zigzag"), layer, hw, obj_flags);
  GroupSchedule start = d_zig <= d_row ? zig : row;

  std::optional<GroupSchedule> mip_start = start;
  {
    const auto x = schedule_to_mip_start(start, model);
    if (!model.check_assignment(x).empty()) {
      std::cerr << "note: heuristic start violates the model constraints; "
                   "solving without a MIP start\n";
      mip_start.reset();
    }
  }

  SolveBudget budget;
  budget.max_seconds = solver_budget(cfg, budget_flag);
  budget.polish_after_seconds = std::min(60.0, budget.max_seconds);

  Solution sol;
  try {
    sol = solve(model, mip_start, budget);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  }
  if (sol.status == SolveStatus::timeout) {
    std::cerr << "timeout without incumbent\n";
    return kExitInfeasible;
  }

  write_file(out_path, write_schedule_csv(sol.schedule));

  nlohmann::ordered_json summary;
  summary["objective"] = sol.objective;
  summary["status"] = to_string(sol.status);
  summary["wall_seconds"] = sol.wall_seconds;
  summary["nodes"] = sol.nodes;
  summary["polish_passes"] = sol.polish_passes;
  summary["k"] = k;
  summary["mip_start_objective"] = sol.mip_start_objective;
  if (sol.mip_start_objective > 0)
    summary["gain_pct"] =
        100.0 * static_cast<double>(sol.mip_start_objective - sol.objective) /
        static_cast<double>(sol.mip_start_objective);
  if (summary_path.empty()) summary_path = out_path + ".json";
  write_file(summary_path, summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

std::pair<int, int> parse_sweep(const std::string& spec) {
  const std::string prefix = "group-size=";
  if (spec.rfind(prefix, 0) != 0)
    throw CliError{kExitParse, "--sweep expects group-size=<a..b>"};
  const std::string range = spec.substr(prefix.size());
  const auto dots = range.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(range);
      return {v, v};
    }
    return {std::stoi(range.substr(0, dots)), std::stoi(range.substr(dots + 2))};
  } catch (const std::exception&) {
    throw CliError{kExitParse, "--sweep expects group-size=<a..b>"};
  }
}

int cmd_compare(const std::string& config_path, const std::string& sweep_spec,
                const std::string& out_dir, bool with_ilp, double budget_flag) {
  const ExperimentConfig cfg = load_config_file(config_path);
  const LayerSpec layer = cfg.layer();
  const HardwareSpec hw = cfg.hardware();
  auto [lo, hi] = parse_sweep(sweep_spec);
  if (lo < 1 || hi < lo) throw CliError{kExitParse, "bad sweep range"};

  std::filesystem::create_directories(out_dir);
  SweepResult sweep;
  sweep.axis_name = "group_size";

  for (int gs = lo; gs <= hi; ++gs) {
    std::vector<StrategyStats> row;
    const GroupSchedule sr = gen_row_by_row(layer, gs);
    const GroupSchedule sz = gen_zigzag(layer, gs);
    const GroupSchedule sb = gen_s1_baseline(layer);
    row.push_back(measure("rowbyrow", sr, layer, hw, cfg.cost_flags(),
                          cfg.nb_data_reload));
    row.push_back(measure("zigzag", sz, layer, hw, cfg.cost_flags(),
                          cfg.nb_data_reload));
    row.push_back(measure("s1-baseline", sb, layer, hw, cfg.cost_flags(),
                          cfg.nb_data_reload));

    auto dump_grids = [&](const std::string& name, const GroupSchedule& sched) {
      write_file(out_dir + "/grid_" + name + "_gs" + std::to_string(gs) + ".txt",
                 render_grid_ascii(sched));
      write_file(out_dir + "/grid_" + name + "_gs" + std::to_string(gs) + ".svg",
                 render_grid_svg(sched));
    };
    dump_grids("rowbyrow", sr);
    dump_grids("zigzag", sz);

    if (with_ilp) {
      const S1Params p = s1_params(layer, hw, gs);
      // reload bound relaxed to K so the heuristic warm start stays feasible
      const IlpModel model = build_model(layer, hw, static_cast<int>(p.k_min),
                                         static_cast<int>(p.k_min), gs);
      const CostFlags obj_flags = objective_cost_flags();
      const long long d_row = strategy_duration(compile(sr, layer, hw, "rowbyrow"),
                                                layer, hw, obj_flags);
      const long long d_zig = strategy_duration(compile(sz, layer, hw, "zigzag"),
                                                layer, hw, obj_flags);
      SolveBudget budget;
      budget.max_seconds = solver_budget(cfg, budget_flag);
      budget.polish_after_seconds = std::min(60.0, budget.max_seconds);
      const Solution sol = solve(model, d_zig <= d_row ? sz : sr, budget);
      row.push_back(measure("ilp", sol.schedule, layer, hw, cfg.cost_flags(),
                            cfg.nb_data_reload));
      write_file(out_dir + "/grid_ilp_gs" + std::to_string(gs) + ".txt",
                 render_grid_ascii(sol.schedule));
      write_file(out_dir + "/grid_ilp_gs" + std::to_string(gs) + ".svg",
                 render_grid_svg(sol.schedule));
    }

    sweep.axis.push_back(gs);
    sweep.rows.push_back(std::move(row));
  }

  write_file(out_dir + "/sweep.csv", sweep.to_csv());
  std::cout << sweep.to_table();
  if (with_ilp) {
    const auto gains = sweep.gains();
    std::cout << "gain_pct";
    for (double g : gains) std::cout << '\t' << g;
    std::cout << "\n";
  }
  std::cout << "wrote " << out_dir << "/sweep.csv\n";
  return 0;
}

int cmd_verify(const std::string& config_path, const std::string& csv_path) {
  const ExperimentConfig cfg = load_config_file(config_path);
  const LayerSpec layer = cfg.layer();
  const HardwareSpec hw = cfg.hardware();
  const GroupSchedule schedule = load_schedule_csv(csv_path, layer);
  const Strategy strat = compile(schedule, layer, hw, "csv");

  nlohmann::ordered_json out;
  const ValidationReport report =
      validate_strategy(strat, layer, hw, cfg.cost_flags(), cfg.nb_data_reload);
  out["valid"] = report.ok();
  out["violations"] = nlohmann::ordered_json::array();
  for (const Violation& v : report.violations)
    out["violations"].push_back({{"kind", to_string(v.kind)},
                                 {"step", v.step},
                                 {"detail", v.detail}});

  auto [input, kernels] = cfg.make_tensors();
  bool match = true;
  std::string mismatch;
  Metrics metrics;
  try {
    auto [output, m] = run_and_verify(strat, input, kernels, layer, hw,
                                      cfg.cost_flags());
    (void)output;
    metrics = std::move(m);
  } catch (const MismatchError& e) {
    match = false;
    mismatch = e.what();
  }
  out["numeric_match"] = match;
  if (!match) out["mismatch"] = mismatch;
  if (match) {
    out["duration_cycles"] = metrics.total_duration;
    out["peak_footprint_elements"] = metrics.peak_footprint;
  }
  std::cout << out.dump(2) << "\n";
  if (!match) return kExitMismatch;
  if (!report.ok()) return kExitValidation;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-step convolution offloading: simulate, generate, optimize"};
  app.require_subcommand(1);

  std::string config_path, trace_path, out_path, summary_path, csv_path;
  std::string strategy_name, k_arg = "kmin", sweep_spec;
  int group_size = 0;
  double budget_flag = -1.0;
  bool with_ilp = false;

  auto* sim = app.add_subcommand("simulate", "run a strategy and check the result");
  sim->add_option("--config", config_path, "experiment config file")->required();
  sim->add_option("--trace", trace_path, "write a JSONL step trace");

  auto* gen = app.add_subcommand("generate", "write a heuristic schedule CSV");
  gen->add_option("--strategy", strategy_name,
                  "rowbyrow | zigzag | s1-baseline")->required();
  gen->add_option("--group-size", group_size, "patches per step");
  gen->add_option("--config", config_path, "experiment config file")->required();
  gen->add_option("--out", out_path, "output CSV path")->required();

  auto* opt = app.add_subcommand("optimize", "search for a minimal-duration schedule");
  opt->add_option("--config", config_path, "experiment config file")->required();
  opt->add_option("--k", k_arg, "number of groups: kmin or an integer");
  opt->add_option("--budget", budget_flag, "solver budget in seconds");
  opt->add_option("--out", out_path, "output CSV path")->required();
  opt->add_option("--summary", summary_path, "summary JSON path (default <out>.json)");

  auto* cmp = app.add_subcommand("compare", "sweep group sizes and compare strategies");
  cmp->add_option("--config", config_path, "experiment config file")->required();
  cmp->add_option("--sweep", sweep_spec, "group-size=<a..b>")->required();
  cmp->add_option("--out", out_path, "output directory")->required();
  cmp->add_flag("--with-ilp", with_ilp, "also run the solver per cell");
  cmp->add_option("--budget", budget_flag, "solver budget in seconds per cell");

  auto* ver = app.add_subcommand("verify", "validate a schedule CSV and check numerics");
  ver->add_option("--config", config_path, "experiment config file")->required();
  ver->add_option("--strategy", csv_path, "schedule CSV to verify")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, trace_path);
    if (gen->parsed()) return cmd_generate(config_path, strategy_name, group_size,
                                           out_path);
    if (opt->parsed()) return cmd_optimize(config_path, k_arg, budget_flag, out_path,
                                           summary_path);
    if (cmp->parsed()) return cmd_compare(config_path, sweep_spec, out_path, with_ilp,
                                          budget_flag);
    if (ver->parsed()) return cmd_verify(config_path, csv_path);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const MismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const AcceleratorTooSmall& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
