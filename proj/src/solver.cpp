#include "efce/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace efce {

namespace {

double min_plan_entry(const CorrelationPlan& plan) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : plan.xi) m = std::min(m, v);
  return m;
}

// Convergence score: the violation metric, joined with the welfare
// shortfall when a floor is being enforced.
double check_value(const Violation& viol, Mode mode, double kappa) {
  double v = viol.metric();
  if (mode == Mode::MaxSW) v = std::max(v, kappa);
  return v;
}

}  // namespace

double Violation::metric() const {
  return std::max({feas_residual, -min_entry, max_deviation});
}

Solver::Solver(const GameTree& game)
    : game_(&game),
      pairs_(RelevantPairs::build(game)),
      systems_(build_consistency(game, pairs_)),
      engine_(game, pairs_, systems_),
      index_(build_trigger_index(game, pairs_)) {}

Violation Solver::measure(const CorrelationPlan& plan, int threads) const {
  Violation v;
  v.feas_residual = consistency_residual(systems_, plan);
  v.min_entry = min_plan_entry(plan);
  v.max_deviation = std::max(0.0, v_star(index_, plan, threads).value);
  return v;
}

SolveResult Solver::run(const SolveConfig& cfg) const {
  return run(cfg, uniform_behavioral_plan(*game_, pairs_));
}

SolveResult Solver::run(const SolveConfig& cfg, const CorrelationPlan& start) const {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  std::vector<double> eps = cfg.eps_checkpoints;
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  double target = eps.empty() ? 1e-3 : eps.back();
  std::vector<bool> eps_hit(eps.size(), false);

  CorrelationPlan plan = start;
  SolveResult out;
  out.stats.converged = false;
  double best_score = std::numeric_limits<double>::infinity();

  std::vector<double> grad;
  for (long iter = 0;; ++iter) {
    SubgradientInfo info =
        subgradient(*game_, pairs_, index_, plan, cfg.mode, cfg.tau, grad, cfg.threads);

    bool last = iter >= cfg.max_iters;
    if (iter % cfg.check_every == 0 || last) {
      Violation viol;
      viol.feas_residual = consistency_residual(systems_, plan);
      viol.min_entry = min_plan_entry(plan);
      viol.max_deviation = std::max(0.0, info.v_star);
      double score = check_value(viol, cfg.mode, info.kappa);
      double now = elapsed();

      out.stats.trace.push_back({iter, now, viol.feas_residual, viol.max_deviation,
                                 info.social_welfare});
      for (size_t i = 0; i < eps.size(); ++i) {
        if (!eps_hit[i] && score <= eps[i]) {
          eps_hit[i] = true;
          out.stats.checkpoints.push_back({eps[i], iter, now});
        }
      }
      if (score < best_score) {
        best_score = score;
        out.plan = plan;
        out.violation = viol;
        out.social_welfare = info.social_welfare;
      }
      if (score <= target) {
        out.converged = true;
        out.stats.converged = true;
        out.stats.iterations = iter;
        out.stats.time_s = now;
        return out;
      }
    }
    if (last) break;

    double step = cfg.sqrt_schedule ? cfg.eta / std::sqrt(static_cast<double>(iter + 1))
                                    : cfg.eta;
    for (int i = 0; i < plan.size(); ++i) plan.xi[i] -= step * grad[i];
    for (int c = 0; c < cfg.project_cycles; ++c) {
      engine_.project_x1(plan, cfg.threads);
      engine_.project_x2(plan, cfg.threads);
    }
    engine_.project_orthant(plan);
  }

  out.stats.iterations = cfg.max_iters;
  out.stats.time_s = elapsed();
  return out;
}

AutoSWResult auto_max_sw(const Solver& solver, const SolveConfig& base, int bisect_steps) {
  AutoSWResult out;

  SolveConfig cfg = base;
  cfg.mode = Mode::Feasibility;
  SolveResult anchor = solver.run(cfg);
  out.anchored = anchor.converged;
  out.result = anchor;
  out.tau = anchor.social_welfare;
  if (!anchor.converged) return out;

  double hi = -std::numeric_limits<double>::infinity();
  for (int t : solver.game().terminals()) {
    const auto& node = solver.game().node(t);
    hi = std::max(hi, node.payoffs[0] + node.payoffs[1]);
  }
  double lo = anchor.social_welfare;

  cfg.mode = Mode::MaxSW;
  for (int s = 0; s < bisect_steps && hi - lo > 1e-9; ++s) {
    double mid = 0.5 * (lo + hi);
    cfg.tau = mid;
    SolveResult probe = solver.run(cfg, out.result.plan);
    out.steps.push_back({mid, probe.converged, probe.social_welfare});
    if (probe.converged) {
      lo = std::max(mid, probe.social_welfare);
      out.result = probe;
      out.tau = lo;
    } else {
      hi = mid;
    }
  }
  return out;
}

}  // namespace efce
