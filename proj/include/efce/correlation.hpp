#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "efce/game_tree.hpp"

namespace efce {

// Dense index over the relevant sequence pairs (sigma1, sigma2): both empty
// sequences always pair, and two nonempty sequences pair iff their infosets
// lie on a common root-to-leaf path.
class RelevantPairs {
 public:
  static RelevantPairs build(const GameTree& game);

  int size() const { return static_cast<int>(pairs_.size()); }
  int num_sequences(PlayerId p) const { return p == kP1 ? n1_ : n2_; }
  // Pair id, or -1 when the pair is irrelevant.
  int id(int s1, int s2) const { return lookup_[static_cast<size_t>(s1) * n2_ + s2]; }
  bool relevant(int s1, int s2) const { return id(s1, s2) >= 0; }
  const std::pair<int, int>& pair(int pid) const { return pairs_[pid]; }

  // Relevance of an infoset against an opposing sequence (constraint rows).
  bool relevant_col(int infoset1, int s2) const;  // Player-1 infoset, sigma2
  bool relevant_row(int s1, int infoset2) const;  // sigma1, Player-2 infoset
  bool connected(int infoset1, int infoset2) const {
    return conn_[static_cast<size_t>(local_[0][infoset1]) * nloc2_ + local_[1][infoset2]] != 0;
  }

 private:
  const GameTree* game_ = nullptr;
  int n1_ = 0, n2_ = 0;
  std::vector<int32_t> lookup_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<uint8_t> conn_;  // player-local infoset index grid
  std::vector<int> local_[2];
  int nloc2_ = 0;
};

// The mediator's decision variable: one value per relevant pair.
struct CorrelationPlan {
  std::vector<double> xi;
  double& operator[](int pid) { return xi[pid]; }
  double operator[](int pid) const { return xi[pid]; }
  int size() const { return static_cast<int>(xi.size()); }
};

// One affine system F x = f over a column (fixed sigma2) or row (fixed
// sigma1) of the plan.  Rows are stored topologically (the normalization
// row, when present, first, then infosets parents-first); elimination for
// the Cholesky factor walks them in reverse.
struct AffineSystem {
  std::vector<int> vars;  // global pair ids; local var index = position
  struct Row {
    std::vector<int> plus;  // local vars with coefficient +1
    int minus = -1;         // local var with coefficient -1 (none if < 0)
    double rhs = 0.0;
  };
  std::vector<Row> rows;
  std::vector<int> row_infoset;  // per row; -1 for the normalization row
  bool empty() const { return rows.empty(); }
};

struct ConsistencySystems {
  std::vector<AffineSystem> x1;  // indexed by sigma2 (column systems)
  std::vector<AffineSystem> x2;  // indexed by sigma1 (row systems)
};

ConsistencySystems build_consistency(const GameTree& game, const RelevantPairs& pairs);

// Largest |F x - f| over every row of one system, given the full plan.
double system_residual(const AffineSystem& sys, const CorrelationPlan& plan);
// Largest residual across both families.
double consistency_residual(const ConsistencySystems& systems, const CorrelationPlan& plan);

// Product of independent uniform behavioral strategies; a feasible plan.
CorrelationPlan uniform_behavioral_plan(const GameTree& game, const RelevantPairs& pairs);

double social_welfare(const GameTree& game, const RelevantPairs& pairs,
                      const CorrelationPlan& plan);

// Probability of ending at each terminal under full compliance.  Throws
// InfeasiblePlan when the consistency residual exceeds the tolerance.
std::vector<std::pair<int, double>> outcome_distribution(const GameTree& game,
                                                         const RelevantPairs& pairs,
                                                         const ConsistencySystems& systems,
                                                         const CorrelationPlan& plan,
                                                         double tolerance = 1e-6);

// Plan CSV: header (seq1_infoset, seq1_action, seq2_infoset, seq2_action,
// value), one row per relevant pair.  Empty sequences use infoset -1 and an
// empty action label.
void write_plan_csv(std::ostream& os, const GameTree& game, const RelevantPairs& pairs,
                    const CorrelationPlan& plan, const std::string& version_stamp = "");
CorrelationPlan read_plan_csv(std::istream& is, const GameTree& game,
                              const RelevantPairs& pairs);

}  // namespace efce
