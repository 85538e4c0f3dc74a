#include "efce/projection.hpp"

#include <algorithm>
#include <cmath>

#include "efce/errors.hpp"
#include "efce/parallel.hpp"

namespace efce {

namespace {

inline int elim_index(int storage_row, int m) { return m - 1 - storage_row; }

}  // namespace

// Lower triangle of F F^T, column-major in elimination indexing:
// mat[k] maps row j >= k to the entry value.
std::vector<std::map<int, double>> normal_matrix(const AffineSystem& sys) {
  int m = static_cast<int>(sys.rows.size());
  std::vector<std::map<int, double>> mat(m);
  std::vector<std::vector<std::pair<int, double>>> var_rows(sys.vars.size());
  for (int r = 0; r < m; ++r) {
    int k = elim_index(r, m);
    const auto& row = sys.rows[r];
    for (int v : row.plus) var_rows[v].push_back({k, 1.0});
    if (row.minus >= 0) var_rows[row.minus].push_back({k, -1.0});
  }
  for (const auto& entries : var_rows) {
    for (size_t a = 0; a < entries.size(); ++a) {
      for (size_t b = 0; b < entries.size(); ++b) {
        int i = entries[a].first, j = entries[b].first;
        if (j > i) continue;
        mat[j][i] += entries[a].second * entries[b].second;
      }
    }
  }
  return mat;
}

CholeskyFactor::CholeskyFactor(const AffineSystem& sys) {
  auto cols = normal_matrix(sys);
  m_ = static_cast<int>(cols.size());
  diag_.resize(m_);
  below_.resize(m_);
  for (int k = 0; k < m_; ++k) {
    auto& col = cols[k];
    double pivot2 = col.count(k) ? col[k] : 0.0;
    if (pivot2 < 1e-12) {
      throw SingularSystem("consistency system is rank deficient at elimination step " +
                           std::to_string(k));
    }
    double pivot = std::sqrt(pivot2);
    diag_[k] = pivot;
    auto& out = below_[k];
    out.reserve(col.size() - 1);
    for (const auto& [j, val] : col) {
      if (j > k) out.push_back({j, val / pivot});
    }
    for (size_t a = 0; a < out.size(); ++a) {
      for (size_t b = a; b < out.size(); ++b) {
        // out is sorted by row, so this always targets the lower triangle.
        cols[out[a].first][out[b].first] -= out[a].second * out[b].second;
      }
    }
  }
}

long CholeskyFactor::nonzeros() const {
  long n = m_;
  for (const auto& col : below_) n += static_cast<long>(col.size());
  return n;
}

void CholeskyFactor::solve(std::vector<double>& rhs) const {
  for (int k = 0; k < m_; ++k) {
    rhs[k] /= diag_[k];
    for (const auto& [j, l] : below_[k]) rhs[j] -= l * rhs[k];
  }
  for (int k = m_ - 1; k >= 0; --k) {
    double acc = rhs[k];
    for (const auto& [j, l] : below_[k]) acc -= l * rhs[j];
    rhs[k] = acc / diag_[k];
  }
}

void project_affine(const AffineSystem& sys, const CholeskyFactor& factor,
                    std::vector<double>& w) {
  int m = static_cast<int>(sys.rows.size());
  std::vector<double> lam(m);
  for (int r = 0; r < m; ++r) {
    const auto& row = sys.rows[r];
    double dot = 0.0;
    for (int v : row.plus) dot += w[v];
    if (row.minus >= 0) dot -= w[row.minus];
    lam[elim_index(r, m)] = row.rhs - dot;
  }
  factor.solve(lam);
  for (int r = 0; r < m; ++r) {
    double l = lam[elim_index(r, m)];
    const auto& row = sys.rows[r];
    for (int v : row.plus) w[v] += l;
    if (row.minus >= 0) w[row.minus] -= l;
  }
}

ProjectionEngine::ProjectionEngine(const GameTree& game, const RelevantPairs& pairs,
                                   const ConsistencySystems& systems)
    : systems_(&systems) {
  (void)game;
  root_pair_ = pairs.id(0, 0);
  fac1_.resize(systems.x1.size());
  for (size_t s = 0; s < systems.x1.size(); ++s) fac1_[s] = factor_for(systems.x1[s]);
  fac2_.resize(systems.x2.size());
  for (size_t s = 0; s < systems.x2.size(); ++s) fac2_[s] = factor_for(systems.x2[s]);
}

std::shared_ptr<CholeskyFactor> ProjectionEngine::factor_for(const AffineSystem& sys) {
  if (sys.empty()) return nullptr;
  // Structure key: variable count plus each row's local indices.  The rhs is
  // excluded on purpose; it never changes the factor.
  std::vector<int> key;
  key.push_back(static_cast<int>(sys.vars.size()));
  for (const auto& row : sys.rows) {
    key.push_back(-2);
    key.push_back(row.minus);
    for (int v : row.plus) key.push_back(v);
  }
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto factor = std::make_shared<CholeskyFactor>(sys);
  cache_.emplace(std::move(key), factor);
  return factor;
}

void ProjectionEngine::project_side(
    const std::vector<AffineSystem>& systems,
    const std::vector<std::shared_ptr<CholeskyFactor>>& factors, CorrelationPlan& plan,
    int threads) const {
  int n = static_cast<int>(systems.size());
  parallel_for(threads, n, [&](int s) {
    const AffineSystem& sys = systems[s];
    if (sys.empty()) return;
    std::vector<double> w(sys.vars.size());
    for (size_t i = 0; i < sys.vars.size(); ++i) w[i] = plan[sys.vars[i]];
    project_affine(sys, *factors[s], w);
    for (size_t i = 0; i < sys.vars.size(); ++i) plan[sys.vars[i]] = w[i];
  });
}

void ProjectionEngine::project_x1(CorrelationPlan& plan, int threads) const {
  project_side(systems_->x1, fac1_, plan, threads);
}

void ProjectionEngine::project_x2(CorrelationPlan& plan, int threads) const {
  project_side(systems_->x2, fac2_, plan, threads);
}

void ProjectionEngine::project_orthant(CorrelationPlan& plan) const {
  for (double& v : plan.xi) v = std::max(0.0, v);
  plan[root_pair_] = 1.0;
}

double ProjectionEngine::residual(const CorrelationPlan& plan) const {
  return consistency_residual(*systems_, plan);
}

}  // namespace efce
