#pragma once

#include <map>
#include <memory>
#include <vector>

#include "efce/correlation.hpp"

namespace efce {

// Sparse Cholesky factor L with L L^T = F F^T for one consistency system.
// Indices follow the elimination order: system rows reversed, so children
// are eliminated before parents and the normalization row last.  This order
// introduces no fill-in, so L lives on the sparsity pattern of tril(F F^T).
class CholeskyFactor {
 public:
  // Throws SingularSystem when a pivot drops below 1e-12.
  explicit CholeskyFactor(const AffineSystem& sys);

  int rows() const { return m_; }
  long nonzeros() const;
  double diag(int k) const { return diag_[k]; }
  const std::vector<std::pair<int, double>>& below(int k) const { return below_[k]; }

  // Solves F F^T lambda = rhs, both in elimination indexing.
  void solve(std::vector<double>& rhs) const;

 private:
  int m_ = 0;
  std::vector<double> diag_;
  std::vector<std::vector<std::pair<int, double>>> below_;  // per column, sorted by row
};

// Builds F F^T for one system in elimination indexing; exposed so tests can
// compare the factor and the closed-form pattern against the definition.
std::vector<std::map<int, double>> normal_matrix(const AffineSystem& sys);

// Euclidean projection onto {x : F x = f}: x* = w + F^T (F F^T)^-1 (f - F w).
// `w` holds the system's local variables; the projection overwrites it.
void project_affine(const AffineSystem& sys, const CholeskyFactor& factor,
                    std::vector<double>& w);

// Per-column/per-row projections onto X1, X2, and the nonnegative orthant.
// Factors are built once and shared between structurally identical systems.
class ProjectionEngine {
 public:
  ProjectionEngine(const GameTree& game, const RelevantPairs& pairs,
                   const ConsistencySystems& systems);

  void project_x1(CorrelationPlan& plan, int threads = 1) const;
  void project_x2(CorrelationPlan& plan, int threads = 1) const;
  // Clamps to the orthant and re-pins xi[empty, empty] = 1.
  void project_orthant(CorrelationPlan& plan) const;

  double residual(const CorrelationPlan& plan) const;

  const CholeskyFactor* factor_x1(int s2) const { return fac1_[s2].get(); }
  const CholeskyFactor* factor_x2(int s1) const { return fac2_[s1].get(); }
  size_t unique_factors() const { return cache_.size(); }

 private:
  std::shared_ptr<CholeskyFactor> factor_for(const AffineSystem& sys);
  void project_side(const std::vector<AffineSystem>& systems,
                    const std::vector<std::shared_ptr<CholeskyFactor>>& factors,
                    CorrelationPlan& plan, int threads) const;

  const ConsistencySystems* systems_;
  int root_pair_ = 0;
  std::vector<std::shared_ptr<CholeskyFactor>> fac1_, fac2_;
  std::map<std::vector<int>, std::shared_ptr<CholeskyFactor>> cache_;
};

}  // namespace efce
