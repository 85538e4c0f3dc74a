#pragma once

#include <vector>

#include "efce/correlation.hpp"
#include "efce/game_tree.hpp"
#include "efce/incentive.hpp"
#include "efce/projection.hpp"

namespace efce {

struct SolveConfig {
  Mode mode = Mode::Feasibility;
  double tau = 0.0;  // social-welfare floor, MaxSW mode only
  double eta = 0.1;
  bool sqrt_schedule = false;  // eta / sqrt(t) instead of constant
  long max_iters = 200000;
  // Sorted descending; the smallest entry is the convergence target.
  std::vector<double> eps_checkpoints = {1e-1, 1e-2, 1e-3};
  int threads = 1;
  int check_every = 10;
  int project_cycles = 1;  // alternating X1/X2 sweeps per iteration
};

// How far a plan is from being an exact equilibrium: consistency residual,
// worst negative entry, and the clamped best deviation gain max(0, v*).
struct Violation {
  double feas_residual = 0.0;
  double min_entry = 0.0;
  double max_deviation = 0.0;
  double metric() const;  // max(feas_residual, -min_entry, max_deviation)
};

struct SolveStats {
  struct Checkpoint {
    double eps = 0.0;
    long iteration = 0;
    double time_s = 0.0;
  };
  struct TraceRow {
    long iteration = 0;
    double time_s = 0.0;
    double feas_residual = 0.0;
    double max_deviation = 0.0;
    double social_welfare = 0.0;
  };
  std::vector<Checkpoint> checkpoints;
  std::vector<TraceRow> trace;
  bool converged = false;
  long iterations = 0;
  double time_s = 0.0;
};

struct SolveResult {
  CorrelationPlan plan;  // best iterate seen, converged or not
  SolveStats stats;
  Violation violation;  // of the returned plan
  double social_welfare = 0.0;
  bool converged = false;
};

// Owns every structure derived from one game so repeated solves (sweeps,
// welfare bisection) share the relevance index and projection factors.
class Solver {
 public:
  explicit Solver(const GameTree& game);

  const GameTree& game() const { return *game_; }
  const RelevantPairs& pairs() const { return pairs_; }
  const ConsistencySystems& systems() const { return systems_; }
  const ProjectionEngine& projection() const { return engine_; }
  const TriggerIndex& triggers() const { return index_; }

  Violation measure(const CorrelationPlan& plan, int threads = 1) const;

  SolveResult run(const SolveConfig& cfg) const;
  SolveResult run(const SolveConfig& cfg, const CorrelationPlan& start) const;

 private:
  const GameTree* game_;
  RelevantPairs pairs_;
  ConsistencySystems systems_;
  ProjectionEngine engine_;
  TriggerIndex index_;
};

// Bisection on the welfare floor: anchors at the welfare of a plain
// feasibility solve, caps at the best terminal welfare, and keeps the
// highest floor whose solve converged.
struct AutoSWResult {
  SolveResult result;  // best converged solve
  double tau = 0.0;    // highest floor that converged
  struct Step {
    double tau = 0.0;
    bool converged = false;
    double social_welfare = 0.0;
  };
  std::vector<Step> steps;
  bool anchored = false;  // the initial feasibility solve converged
};

AutoSWResult auto_max_sw(const Solver& solver, const SolveConfig& base, int bisect_steps = 12);

}  // namespace efce
