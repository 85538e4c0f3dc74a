#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "efce/brute_force.hpp"
#include "efce/correlation.hpp"
#include "efce/errors.hpp"
#include "efce/game_tree.hpp"
#include "efce/generators.hpp"
#include "efce/incentive.hpp"
#include "efce/lp_export.hpp"
#include "efce/solver.hpp"

namespace {

using namespace efce;

constexpr const char* kVersion = "efce-lab 1.0.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

GameTree load_game(const std::string& path) {
  GameTree game = GameTree::from_json_file(path);
  game.finalize();
  return game;
}

CorrelationPlan load_plan(const std::string& path, const GameTree& game,
                          const RelevantPairs& pairs) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  return read_plan_csv(in, game, pairs);
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

void save_plan(const std::string& path, const GameTree& game, const RelevantPairs& pairs,
               const CorrelationPlan& plan) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  write_plan_csv(out, game, pairs, plan, kVersion);
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

void save_stats(const std::string& path, const SolveStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  out << "# " << kVersion << "\n";
  out << "iteration,time_s,feas_residual,max_deviation,social_welfare\n";
  for (const auto& row : stats.trace) {
    out << row.iteration << ',' << fmt(row.time_s) << ',' << fmt(row.feas_residual) << ','
        << fmt(row.max_deviation) << ',' << fmt(row.social_welfare) << "\n";
  }
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

std::string sequence_name(const GameTree& game, PlayerId p, int sid) {
  if (sid == 0) return "(empty)";
  const SequenceKey& key = game.sequence(p, sid);
  const std::string& action = game.infoset(key.infoset).actions[key.action];
  return "seq " + std::to_string(sid) + " = infoset " + std::to_string(key.infoset) +
         " action '" + action + "'";
}

// ---- gen ----

int cmd_gen(const GameTree& game, const std::string& out) {
  save_text(out, game.to_json() + "\n");
  int terminals = static_cast<int>(game.terminals().size());
  std::cout << "wrote " << out << " (nodes=" << game.num_nodes()
            << ", terminals=" << terminals << ", infosets=" << game.num_infosets() << ")\n";
  return 0;
}

// ---- solve ----

struct SolveFlags {
  std::string game_path;
  std::string mode = "feas";
  double tau = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.1;
  std::string eta_schedule = "const";
  double eps = 1e-3;
  long max_iters = 200000;
  int threads = 1;
  int check_every = 10;
  int project_cycles = 1;
  int bisect_steps = 12;
  std::string out, stats;
};

SolveConfig make_config(const SolveFlags& flags) {
  SolveConfig cfg;
  cfg.eta = flags.eta;
  cfg.sqrt_schedule = flags.eta_schedule == "sqrt";
  cfg.max_iters = flags.max_iters;
  cfg.threads = flags.threads;
  cfg.check_every = flags.check_every;
  cfg.project_cycles = flags.project_cycles;
  cfg.eps_checkpoints.clear();
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    if (eps > flags.eps) cfg.eps_checkpoints.push_back(eps);
  }
  cfg.eps_checkpoints.push_back(flags.eps);
  return cfg;
}

void print_result(const SolveResult& result) {
  for (const auto& cp : result.stats.checkpoints) {
    std::cout << "checkpoint eps=" << fmt_short(cp.eps) << " iteration=" << cp.iteration
              << " time_s=" << fmt_short(cp.time_s) << "\n";
  }
  std::cout << "converged: " << (result.converged ? "yes" : "no")
            << "  iterations: " << result.stats.iterations
            << "  time_s: " << fmt_short(result.stats.time_s) << "\n";
  std::cout << "feas_residual: " << fmt_short(result.violation.feas_residual)
            << "  min_entry: " << fmt_short(result.violation.min_entry)
            << "  max_deviation: " << fmt_short(result.violation.max_deviation) << "\n";
  std::cout << "social_welfare: " << fmt(result.social_welfare) << "\n";
}

int cmd_solve(const SolveFlags& flags) {
  GameTree game = load_game(flags.game_path);
  Solver solver(game);
  std::cout << "game: " << flags.game_path << "  pairs: " << solver.pairs().size()
            << "  triggers: " << solver.triggers().triggers.size() << "\n";

  SolveConfig cfg = make_config(flags);
  SolveResult result;
  if (flags.mode == "feas") {
    cfg.mode = Mode::Feasibility;
    result = solver.run(cfg);
  } else if (flags.mode == "maxsw") {
    if (std::isnan(flags.tau)) throw ValidationError("--mode maxsw requires --tau");
    cfg.mode = Mode::MaxSW;
    cfg.tau = flags.tau;
    result = solver.run(cfg);
  } else {
    AutoSWResult auto_result = auto_max_sw(solver, cfg, flags.bisect_steps);
    for (const auto& step : auto_result.steps) {
      std::cout << "bisect tau=" << fmt(step.tau)
                << " converged=" << (step.converged ? "yes" : "no")
                << " social_welfare=" << fmt(step.social_welfare) << "\n";
    }
    std::cout << "welfare_floor: " << fmt(auto_result.tau) << "\n";
    result = auto_result.result;
  }

  print_result(result);
  if (!flags.out.empty()) {
    save_plan(flags.out, game, solver.pairs(), result.plan);
    std::cout << "wrote plan: " << flags.out << "\n";
  }
  if (!flags.stats.empty()) {
    save_stats(flags.stats, result.stats);
    std::cout << "wrote stats: " << flags.stats << "\n";
  }
  return result.converged ? 0 : 3;
}

// ---- export-lp ----

int cmd_export(const std::string& game_path, const std::string& formulation,
               const std::string& format, const std::string& out) {
  GameTree game = load_game(game_path);
  LPFormulation f = formulation == "min-dev"    ? LPFormulation::MinDeviation
                    : formulation == "feas-dev" ? LPFormulation::FeasDeviation
                                                : LPFormulation::MaximumSW;
  LPModel model = build_lp(game, f);
  write_lp_file(model, out, format == "mps" ? LPFileFormat::MPS : LPFileFormat::LPText);
  std::cout << "wrote " << out << " (variables=" << model.vars.size()
            << ", constraints=" << model.cons.size() << ")\n";
  return 0;
}

// ---- verify ----

int cmd_verify(const std::string& game_path, const std::string& plan_path, double eps,
               long cap, const std::string& report_path) {
  GameTree game = load_game(game_path);
  RelevantPairs pairs = RelevantPairs::build(game);
  CorrelationPlan plan = load_plan(plan_path, game, pairs);
  ConsistencySystems systems = build_consistency(game, pairs);

  double residual = consistency_residual(systems, plan);
  double min_entry = 0.0;
  for (double v : plan.xi) min_entry = std::min(min_entry, v);
  std::vector<TriggerGain> gains = all_trigger_gains(game, pairs, plan, cap);
  double max_gain = 0.0;
  for (const auto& g : gains) max_gain = std::max(max_gain, g.gain);

  bool ok_consistency = residual <= eps;
  bool ok_nonneg = min_entry >= -eps;
  bool ok_incentive = max_gain <= eps;
  bool ok = ok_consistency && ok_nonneg && ok_incentive;

  std::cout << "consistency_residual: " << fmt_short(residual) << " (eps " << fmt_short(eps)
            << "): " << (ok_consistency ? "ok" : "VIOLATED") << "\n";
  std::cout << "min_entry: " << fmt_short(min_entry) << ": "
            << (ok_nonneg ? "ok" : "VIOLATED") << "\n";
  std::cout << "incentive: " << gains.size() << " triggers checked, max gain "
            << fmt_short(max_gain) << ": " << (ok_incentive ? "ok" : "VIOLATED") << "\n";
  for (const auto& g : gains) {
    if (g.gain <= eps) continue;
    std::cout << "  player " << (g.player + 1) << " "
              << sequence_name(game, g.player, g.trigger_sid) << " gains "
              << fmt_short(g.gain) << "\n";
  }
  std::cout << "verdict: " << (ok ? "PASS" : "FAIL") << "\n";

  if (!report_path.empty()) {
    std::ostringstream csv;
    csv << "# " << kVersion << "\n";
    csv << "check,detail,value,threshold,pass\n";
    csv << "consistency,max_residual," << fmt(residual) << ',' << fmt(eps) << ','
        << ok_consistency << "\n";
    csv << "nonnegativity,min_entry," << fmt(min_entry) << ',' << fmt(-eps) << ','
        << ok_nonneg << "\n";
    csv << "incentive,max_gain," << fmt(max_gain) << ',' << fmt(eps) << ',' << ok_incentive
        << "\n";
    for (const auto& g : gains) {
      if (g.gain <= eps) continue;
      csv << "incentive," << csv_quote("p" + std::to_string(g.player + 1) + " " +
                                       sequence_name(game, g.player, g.trigger_sid))
          << ',' << fmt(g.gain) << ',' << fmt(eps) << ",0\n";
    }
    save_text(report_path, csv.str());
    std::cout << "wrote report: " << report_path << "\n";
  }
  return ok ? 0 : 2;
}

// ---- audit ----

int cmd_audit(const std::string& game_path, const std::string& plan_path, int top) {
  GameTree game = load_game(game_path);
  Solver solver(game);
  const RelevantPairs& pairs = solver.pairs();
  CorrelationPlan plan = load_plan(plan_path, game, pairs);

  Violation viol = solver.measure(plan);
  std::cout << "pairs: " << pairs.size()
            << "  triggers: " << solver.triggers().triggers.size() << "\n";
  std::cout << "feas_residual: " << fmt(viol.feas_residual) << "\n";
  std::cout << "min_entry: " << fmt(viol.min_entry) << "\n";
  std::cout << "max_deviation: " << fmt(viol.max_deviation) << "\n";
  std::cout << "violation_metric: " << fmt(viol.metric()) << "\n";
  std::cout << "social_welfare: " << fmt(social_welfare(game, pairs, plan)) << "\n";

  struct Entry {
    double value;
    size_t index;
  };
  std::vector<Entry> order;
  for (size_t t = 0; t < solver.triggers().triggers.size(); ++t) {
    order.push_back({deviation_value(solver.triggers().triggers[t], plan).value, t});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Entry& a, const Entry& b) { return a.value > b.value; });
  std::cout << "top deviation triggers:\n";
  for (int k = 0; k < top && k < static_cast<int>(order.size()); ++k) {
    const TriggerInfo& trig = solver.triggers().triggers[order[k].index];
    std::cout << "  " << (k + 1) << ". player " << (trig.player + 1) << " "
              << sequence_name(game, trig.player, trig.trigger_sid) << " value "
              << fmt_short(order[k].value) << "\n";
  }

  std::cout << "outcome distribution:\n";
  try {
    std::map<std::string, double> by_label;
    for (const auto& [z, prob] : outcome_distribution(game, pairs, solver.systems(), plan)) {
      const std::string& label = game.node(z).label;
      by_label[label.empty() ? "node " + std::to_string(z) : label] += prob;
    }
    std::vector<std::pair<std::string, double>> rows(by_label.begin(), by_label.end());
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    int shown = 0;
    for (const auto& [label, prob] : rows) {
      if (shown == 20) {
        std::cout << "  ... (" << rows.size() - shown << " more)\n";
        break;
      }
      std::cout << "  " << label << ": " << fmt_short(prob) << "\n";
      ++shown;
    }
  } catch (const InfeasiblePlan& e) {
    std::cout << "  unavailable: " << e.what() << "\n";
  }
  return 0;
}

// ---- stats ----

int cmd_stats(const std::string& game_path) {
  GameTree game = load_game(game_path);
  RelevantPairs pairs = RelevantPairs::build(game);
  std::cout << "nodes " << game.num_nodes() << "\n";
  std::cout << "terminals " << game.terminals().size() << "\n";
  for (PlayerId p : {kP1, kP2}) {
    std::string tag = "_p" + std::to_string(p + 1);
    std::cout << "infosets" << tag << " " << game.infosets_of(p).size() << "\n";
    std::cout << "sequences" << tag << " " << game.num_sequences(p) << "\n";
    std::cout << "sequences_nonempty" << tag << " " << game.num_sequences(p) - 1 << "\n";
  }
  std::cout << "relevant_pairs " << pairs.size() << "\n";
  return 0;
}

// ---- sweep ----

struct SweepFlags {
  std::string family;
  std::string param;
  std::string values;
  std::string backend = "subgradient";
  std::string solver_cmd = "python3 tools/solve_lp.py";
  std::string out;
  BattleshipParams battleship;
  std::string ships = "1x1";
  SheriffParams sheriff;
  int rounds = -1;  // shared flag; <0 keeps the family default
  SolveFlags solve;
};

struct ExternalSolution {
  bool ok = false;
  std::string status;
  std::unordered_map<std::string, double> values;
};

ExternalSolution run_external_lp(const std::string& cmd, const std::string& lp_path,
                                 const std::string& sol_path) {
  ExternalSolution sol;
  std::string full = cmd + " '" + lp_path + "' > '" + sol_path + "' 2>&1";
  int rc = std::system(full.c_str());
  std::ifstream in(sol_path);
  if (rc != 0 || !in) {
    sol.status = "solver-command-failed";
    return sol;
  }
  std::string kind;
  while (in >> kind) {
    if (kind == "status") {
      std::getline(in, sol.status);
      while (!sol.status.empty() && sol.status.front() == ' ') sol.status.erase(0, 1);
    } else if (kind == "objective") {
      double ignored;
      in >> ignored;
    } else if (kind == "var") {
      std::string name;
      double value;
      in >> name >> value;
      sol.values[name] = value;
    } else {
      std::getline(in, kind);
    }
  }
  sol.ok = sol.status == "optimal";
  return sol;
}

struct RowMetrics {
  double u1 = 0.0, u2 = 0.0;
  std::map<std::string, double> label_mass;
};

RowMetrics plan_metrics(const GameTree& game, const RelevantPairs& pairs,
                        const CorrelationPlan& plan) {
  RowMetrics m;
  for (int z : game.terminals()) {
    const Node& node = game.node(z);
    int pid = pairs.id(game.last_sequence(kP1, z), game.last_sequence(kP2, z));
    double prob = plan[pid];
    m.u1 += node.payoffs[0] * prob;
    m.u2 += node.payoffs[1] * prob;
    m.label_mass[node.label] += prob;
  }
  return m;
}

int cmd_sweep(const SweepFlags& flags) {
  bool battleship = flags.family == "battleship";
  std::vector<double> values;
  {
    std::istringstream in(flags.values);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (tok.empty()) continue;
      values.push_back(std::stod(tok));
    }
  }

  std::ostringstream csv;
  csv << "# " << kVersion << "\n";
  csv << "param,value,u1,u2,social_welfare";
  if (battleship) csv << ",p_p1_sinks,p_p2_sinks,p_peace";
  csv << ",status\n";

  for (double value : values) {
    std::string status = "ok";
    RowMetrics metrics;
    bool have_metrics = false;
    try {
      GameTree game;
      if (battleship) {
        BattleshipParams params = flags.battleship;
        params.ships = parse_ships(flags.ships);
        if (flags.rounds > 0) params.rounds = flags.rounds;
        if (flags.param == "gamma") {
          params.gamma = value;
        } else if (flags.param == "rounds") {
          params.rounds = static_cast<int>(value);
        } else if (flags.param == "height") {
          params.height = static_cast<int>(value);
        } else if (flags.param == "width") {
          params.width = static_cast<int>(value);
        } else {
          throw ValidationError("unknown battleship sweep parameter " + flags.param);
        }
        game = gen_battleship(params);
      } else {
        SheriffParams params = flags.sheriff;
        if (flags.rounds > 0) params.rounds = flags.rounds;
        if (flags.param == "v") {
          params.v = value;
        } else if (flags.param == "p") {
          params.p = value;
        } else if (flags.param == "s") {
          params.s = value;
        } else if (flags.param == "nmax") {
          params.n_max = static_cast<int>(value);
        } else if (flags.param == "bmax") {
          params.b_max = static_cast<int>(value);
        } else if (flags.param == "rounds") {
          params.rounds = static_cast<int>(value);
        } else {
          throw ValidationError("unknown sheriff sweep parameter " + flags.param);
        }
        game = gen_sheriff(params);
      }

      RelevantPairs pairs = RelevantPairs::build(game);
      if (flags.backend == "lp-export") {
        TriggerIndex index = build_trigger_index(game, pairs);
        LPModel model = build_lp(game, pairs, index, LPFormulation::MaximumSW);
        std::string base = flags.out + "." + flags.param + "_" + fmt_short(value);
        write_lp_file(model, base + ".lp", LPFileFormat::LPText);
        if (flags.solver_cmd.empty()) {
          status = "exported";
        } else {
          ExternalSolution sol = run_external_lp(flags.solver_cmd, base + ".lp", base + ".sol");
          if (!sol.ok) {
            status = "lp-" + (sol.status.empty() ? std::string("failed") : sol.status);
          } else {
            CorrelationPlan plan;
            plan.xi.assign(pairs.size(), 0.0);
            for (int pid = 0; pid < pairs.size(); ++pid) {
              auto it = sol.values.find("xi_" + std::to_string(pid));
              if (it == sol.values.end()) throw ParseError("solution misses xi variables");
              plan[pid] = it->second;
            }
            metrics = plan_metrics(game, pairs, plan);
            have_metrics = true;
          }
        }
      } else {
        Solver solver(game);
        SolveConfig cfg = make_config(flags.solve);
        AutoSWResult result = auto_max_sw(solver, cfg, flags.solve.bisect_steps);
        if (!result.anchored) {
          status = "did-not-converge";
        } else {
          metrics = plan_metrics(game, solver.pairs(), result.result.plan);
          have_metrics = true;
        }
      }
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
      have_metrics = false;
    }

    csv << flags.param << ',' << fmt(value) << ',';
    if (have_metrics) {
      csv << fmt(metrics.u1) << ',' << fmt(metrics.u2) << ',' << fmt(metrics.u1 + metrics.u2);
    } else {
      csv << ",,";
    }
    if (battleship) {
      if (have_metrics) {
        csv << ',' << fmt(metrics.label_mass["p1_sinks"]) << ','
            << fmt(metrics.label_mass["p2_sinks"]) << ',' << fmt(metrics.label_mass["peace"]);
      } else {
        csv << ",,,";
      }
    }
    csv << ',' << csv_quote(status) << "\n";
    std::cout << flags.param << "=" << fmt_short(value) << ": " << status << "\n";
  }

  save_text(flags.out, csv.str());
  std::cout << "wrote sweep: " << flags.out << "\n";
  return 0;
}

void add_solver_options(CLI::App* cmd, SolveFlags& flags) {
  cmd->add_option("--eta", flags.eta, "Subgradient step size")->capture_default_str();
  cmd->add_option("--eta-schedule", flags.eta_schedule, "Step schedule")
      ->check(CLI::IsMember({"const", "sqrt"}))
      ->capture_default_str();
  cmd->add_option("--eps", flags.eps, "Target violation tolerance")->capture_default_str();
  cmd->add_option("--max-iters", flags.max_iters, "Iteration cap per solve")
      ->capture_default_str();
  cmd->add_option("--threads,-j", flags.threads, "Worker threads")->capture_default_str();
  cmd->add_option("--check-every", flags.check_every, "Violation check period")
      ->capture_default_str();
  cmd->add_option("--project-cycles", flags.project_cycles,
                  "Alternating projection sweeps per iteration")
      ->capture_default_str();
  cmd->add_option("--bisect-steps", flags.bisect_steps,
                  "Bisection steps for welfare maximization")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extensive-form correlated equilibrium toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Read options from a key=value config file");
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a benchmark game as JSON");
  gen->require_subcommand(1);
  BattleshipParams bs_params;
  std::string bs_ships = "1x1", bs_out;
  auto* gen_bs = gen->add_subcommand("battleship", "Two-grid battleship game");
  gen_bs->add_option("--height", bs_params.height, "Grid height")->capture_default_str();
  gen_bs->add_option("--width", bs_params.width, "Grid width")->capture_default_str();
  gen_bs->add_option("--ships", bs_ships, "Fleet as LxV,... (length x value)")
      ->capture_default_str();
  gen_bs->add_option("--rounds", bs_params.rounds, "Shots per player")->capture_default_str();
  gen_bs->add_option("--gamma", bs_params.gamma, "Own-loss multiplier (>= 1)")
      ->capture_default_str();
  gen_bs->add_flag("--allow-repeat-shots", bs_params.allow_repeat_shots,
                   "Allow shooting the same cell twice");
  gen_bs->add_option("--max-nodes", bs_params.max_nodes, "Tree size cap")
      ->capture_default_str();
  gen_bs->add_option("-o,--out", bs_out, "Output game JSON path")->required();

  SheriffParams sh_params;
  std::string sh_out;
  auto* gen_sh = gen->add_subcommand("sheriff", "Smuggler-vs-sheriff bargaining game");
  gen_sh->add_option("--v", sh_params.v, "Value per smuggled item")->capture_default_str();
  gen_sh->add_option("--p", sh_params.p, "Penalty per item when caught")
      ->capture_default_str();
  gen_sh->add_option("--s", sh_params.s, "Compensation after a false alarm")
      ->capture_default_str();
  gen_sh->add_option("--nmax", sh_params.n_max, "Maximum items to load")
      ->capture_default_str();
  gen_sh->add_option("--bmax", sh_params.b_max, "Maximum bribe per round")
      ->capture_default_str();
  gen_sh->add_option("--rounds", sh_params.rounds, "Bargaining rounds")->capture_default_str();
  gen_sh->add_option("--max-nodes", sh_params.max_nodes, "Tree size cap")
      ->capture_default_str();
  gen_sh->add_option("-o,--out", sh_out, "Output game JSON path")->required();

  // solve
  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Projected subgradient equilibrium solver");
  solve_cmd->add_option("game", solve_flags.game_path, "Game JSON path")->required();
  solve_cmd->add_option("--mode", solve_flags.mode, "feas, maxsw, or maxsw-auto")
      ->check(CLI::IsMember({"feas", "maxsw", "maxsw-auto"}))
      ->capture_default_str();
  solve_cmd->add_option("--tau", solve_flags.tau, "Social-welfare floor (maxsw)");
  add_solver_options(solve_cmd, solve_flags);
  solve_cmd->add_option("--out", solve_flags.out, "Write the plan CSV here");
  solve_cmd->add_option("--stats", solve_flags.stats, "Write the iteration trace CSV here");

  // export-lp
  std::string exp_game, exp_formulation = "max-sw", exp_format = "lp", exp_out;
  auto* export_cmd = app.add_subcommand("export-lp", "Write an equivalent linear program");
  export_cmd->add_option("game", exp_game, "Game JSON path")->required();
  export_cmd->add_option("--formulation", exp_formulation, "LP formulation")
      ->check(CLI::IsMember({"min-dev", "feas-dev", "max-sw"}))
      ->capture_default_str();
  export_cmd->add_option("--format", exp_format, "File format")
      ->check(CLI::IsMember({"lp", "mps"}))
      ->capture_default_str();
  export_cmd->add_option("-o,--out", exp_out, "Output model path")->required();

  // verify
  std::string ver_game, ver_plan, ver_report;
  double ver_eps = 1e-6;
  long ver_cap = 1000000;
  auto* verify_cmd = app.add_subcommand("verify", "Exhaustive equilibrium check of a plan");
  verify_cmd->add_option("game", ver_game, "Game JSON path")->required();
  verify_cmd->add_option("plan", ver_plan, "Plan CSV path")->required();
  verify_cmd->add_option("--eps", ver_eps, "Violation tolerance")->capture_default_str();
  verify_cmd->add_option("--cap", ver_cap, "Continuation enumeration cap")
      ->capture_default_str();
  verify_cmd->add_option("--report", ver_report, "Also write a CSV violation report here");

  // audit
  std::string aud_game, aud_plan;
  int aud_top = 5;
  auto* audit_cmd = app.add_subcommand("audit", "Inspect a plan: violations and outcomes");
  audit_cmd->add_option("game", aud_game, "Game JSON path")->required();
  audit_cmd->add_option("plan", aud_plan, "Plan CSV path")->required();
  audit_cmd->add_option("--top", aud_top, "Deviation triggers to list")->capture_default_str();

  // sweep
  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Welfare-maximizing parameter sweep CSV");
  sweep_cmd->add_option("--family", sweep_flags.family, "Game family")
      ->check(CLI::IsMember({"battleship", "sheriff"}))
      ->required();
  sweep_cmd->add_option("--param", sweep_flags.param, "Swept parameter name")->required();
  sweep_cmd->add_option("--values", sweep_flags.values, "Comma-separated values")->required();
  sweep_cmd->add_option("--backend", sweep_flags.backend, "Per-row optimizer")
      ->check(CLI::IsMember({"subgradient", "lp-export"}))
      ->capture_default_str();
  sweep_cmd
      ->add_option("--solver-cmd", sweep_flags.solver_cmd,
                   "External LP solver command (lp-export backend); empty = export only")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_flags.out, "Output CSV path")->required();
  sweep_cmd->add_option("--height", sweep_flags.battleship.height, "Battleship grid height")
      ->capture_default_str();
  sweep_cmd->add_option("--width", sweep_flags.battleship.width, "Battleship grid width")
      ->capture_default_str();
  sweep_cmd->add_option("--ships", sweep_flags.ships, "Battleship fleet LxV,...")
      ->capture_default_str();
  sweep_cmd->add_option("--gamma", sweep_flags.battleship.gamma, "Battleship loss multiplier")
      ->capture_default_str();
  sweep_cmd->add_flag("--allow-repeat-shots", sweep_flags.battleship.allow_repeat_shots,
                      "Battleship: allow repeated shots");
  sweep_cmd->add_option("--v", sweep_flags.sheriff.v, "Sheriff item value")
      ->capture_default_str();
  sweep_cmd->add_option("--p", sweep_flags.sheriff.p, "Sheriff penalty per item")
      ->capture_default_str();
  sweep_cmd->add_option("--s", sweep_flags.sheriff.s, "Sheriff false-alarm compensation")
      ->capture_default_str();
  sweep_cmd->add_option("--nmax", sweep_flags.sheriff.n_max, "Sheriff max items")
      ->capture_default_str();
  sweep_cmd->add_option("--bmax", sweep_flags.sheriff.b_max, "Sheriff max bribe")
      ->capture_default_str();
  sweep_cmd->add_option("--rounds", sweep_flags.rounds,
                        "Rounds (both families; negative keeps defaults)");
  add_solver_options(sweep_cmd, sweep_flags.solve);

  // stats
  std::string stats_game;
  auto* stats_cmd = app.add_subcommand("stats", "Print size statistics of a game");
  stats_cmd->add_option("game", stats_game, "Game JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen_bs->parsed()) {
      bs_params.ships = parse_ships(bs_ships);
      return cmd_gen(gen_battleship(bs_params), bs_out);
    }
    if (gen_sh->parsed()) return cmd_gen(gen_sheriff(sh_params), sh_out);
    if (solve_cmd->parsed()) return cmd_solve(solve_flags);
    if (export_cmd->parsed()) return cmd_export(exp_game, exp_formulation, exp_format, exp_out);
    if (verify_cmd->parsed()) return cmd_verify(ver_game, ver_plan, ver_eps, ver_cap, ver_report);
    if (audit_cmd->parsed()) return cmd_audit(aud_game, aud_plan, aud_top);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags);
    if (stats_cmd->parsed()) return cmd_stats(stats_game);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownSequence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Unsatisfiable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SingularSystem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasiblePlan& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
