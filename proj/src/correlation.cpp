#include "efce/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace efce {

RelevantPairs RelevantPairs::build(const GameTree& game) {
  RelevantPairs rp;
  rp.game_ = &game;
  rp.n1_ = game.num_sequences(kP1);
  rp.n2_ = game.num_sequences(kP2);

  for (PlayerId pl : {kP1, kP2}) {
    rp.local_[pl].assign(game.num_infosets(), -1);
    int k = 0;
    for (int iid : game.infosets_of(pl)) rp.local_[pl][iid] = k++;
  }
  int nloc1 = static_cast<int>(game.infosets_of(kP1).size());
  rp.nloc2_ = static_cast<int>(game.infosets_of(kP2).size());
  rp.conn_.assign(static_cast<size_t>(nloc1) * rp.nloc2_, 0);

  // Two infosets are connected when a node of one is an ancestor of a node
  // of the other (they then share that root-to-leaf path).
  for (int id = 0; id < game.num_nodes(); ++id) {
    const Node& nd = game.node(id);
    if (nd.terminal) continue;
    for (int anc = game.parent_node(id); anc >= 0; anc = game.parent_node(anc)) {
      const Node& an = game.node(anc);
      if (an.owner == nd.owner) continue;
      int i1 = (nd.owner == kP1) ? nd.infoset : an.infoset;
      int i2 = (nd.owner == kP1) ? an.infoset : nd.infoset;
      rp.conn_[static_cast<size_t>(rp.local_[0][i1]) * rp.nloc2_ + rp.local_[1][i2]] = 1;
    }
  }

  rp.lookup_.assign(static_cast<size_t>(rp.n1_) * rp.n2_, -1);
  for (int s1 = 0; s1 < rp.n1_; ++s1) {
    for (int s2 = 0; s2 < rp.n2_; ++s2) {
      bool rel;
      if (s1 == 0 || s2 == 0) {
        rel = true;
      } else {
        rel = rp.connected(game.sequence(kP1, s1).infoset, game.sequence(kP2, s2).infoset);
      }
      if (rel) {
        rp.lookup_[static_cast<size_t>(s1) * rp.n2_ + s2] = static_cast<int32_t>(rp.pairs_.size());
        rp.pairs_.emplace_back(s1, s2);
      }
    }
  }
  return rp;
}

bool RelevantPairs::relevant_col(int infoset1, int s2) const {
  if (s2 == 0) return true;
  return connected(infoset1, game_->sequence(kP2, s2).infoset);
}

bool RelevantPairs::relevant_row(int s1, int infoset2) const {
  if (s1 == 0) return true;
  return connected(game_->sequence(kP1, s1).infoset, infoset2);
}

namespace {

// Shared construction for the X1 columns (per sigma2) and, with the roles of
// the players flipped, the X2 rows (per sigma1).
std::vector<AffineSystem> build_side(const GameTree& game, const RelevantPairs& pairs,
                                     PlayerId varside) {
  PlayerId fixside = 1 - varside;
  int nfix = game.num_sequences(fixside);
  int nvar = game.num_sequences(varside);
  std::vector<AffineSystem> out(nfix);
  std::vector<int> local(nvar);

  auto pid_of = [&](int svar, int sfix) {
    return varside == kP1 ? pairs.id(svar, sfix) : pairs.id(sfix, svar);
  };
  auto in_scope = [&](int iid, int sfix) {
    return varside == kP1 ? pairs.relevant_col(iid, sfix) : pairs.relevant_row(sfix, iid);
  };

  for (int sfix = 0; sfix < nfix; ++sfix) {
    AffineSystem& sys = out[sfix];
    std::fill(local.begin(), local.end(), -1);
    for (int svar = 0; svar < nvar; ++svar) {
      int pid = pid_of(svar, sfix);
      if (pid >= 0) {
        local[svar] = static_cast<int>(sys.vars.size());
        sys.vars.push_back(pid);
      }
    }
    if (sfix == 0) {
      // The normalization xi[empty, empty] = 1 acts as a virtual root.
      sys.rows.push_back({{local[0]}, -1, 1.0});
      sys.row_infoset.push_back(-1);
    }
    for (int iid : game.infosets_of(varside)) {
      if (!in_scope(iid, sfix)) continue;
      AffineSystem::Row row;
      const Infoset& is = game.infoset(iid);
      for (int a = 0; a < static_cast<int>(is.actions.size()); ++a)
        row.plus.push_back(local[game.sequence_id(varside, iid, a)]);
      row.minus = local[game.parent_sequence(iid)];
      row.rhs = 0.0;
      sys.rows.push_back(std::move(row));
      sys.row_infoset.push_back(iid);
    }
    if (sys.rows.empty()) sys.vars.clear();  // unconstrained column projects to itself
  }
  return out;
}

}  // namespace

ConsistencySystems build_consistency(const GameTree& game, const RelevantPairs& pairs) {
  ConsistencySystems cs;
  cs.x1 = build_side(game, pairs, kP1);
  cs.x2 = build_side(game, pairs, kP2);
  return cs;
}

double system_residual(const AffineSystem& sys, const CorrelationPlan& plan) {
  double worst = 0.0;
  for (const auto& row : sys.rows) {
    double v = -row.rhs;
    for (int l : row.plus) v += plan[sys.vars[l]];
    if (row.minus >= 0) v -= plan[sys.vars[row.minus]];
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

double consistency_residual(const ConsistencySystems& systems, const CorrelationPlan& plan) {
  double worst = 0.0;
  for (const auto& sys : systems.x1) worst = std::max(worst, system_residual(sys, plan));
  for (const auto& sys : systems.x2) worst = std::max(worst, system_residual(sys, plan));
  return worst;
}

CorrelationPlan uniform_behavioral_plan(const GameTree& game, const RelevantPairs& pairs) {
  std::array<std::vector<double>, 2> reach;
  for (PlayerId pl : {kP1, kP2}) {
    reach[pl].assign(game.num_sequences(pl), 1.0);
    for (int iid : game.infosets_of(pl)) {
      const Infoset& is = game.infoset(iid);
      double share = reach[pl][game.parent_sequence(iid)] / is.actions.size();
      for (int a = 0; a < static_cast<int>(is.actions.size()); ++a)
        reach[pl][game.sequence_id(pl, iid, a)] = share;
    }
  }
  CorrelationPlan plan;
  plan.xi.resize(pairs.size());
  for (int pid = 0; pid < pairs.size(); ++pid) {
    auto [s1, s2] = pairs.pair(pid);
    plan.xi[pid] = reach[kP1][s1] * reach[kP2][s2];
  }
  return plan;
}

double social_welfare(const GameTree& game, const RelevantPairs& pairs,
                      const CorrelationPlan& plan) {
  double sw = 0.0;
  for (int z : game.terminals()) {
    int pid = pairs.id(game.last_sequence(kP1, z), game.last_sequence(kP2, z));
    sw += (game.node(z).payoffs[0] + game.node(z).payoffs[1]) * plan[pid];
  }
  return sw;
}

std::vector<std::pair<int, double>> outcome_distribution(const GameTree& game,
                                                         const RelevantPairs& pairs,
                                                         const ConsistencySystems& systems,
                                                         const CorrelationPlan& plan,
                                                         double tolerance) {
  double resid = consistency_residual(systems, plan);
  double neg = 0.0;
  for (double v : plan.xi) neg = std::min(neg, v);
  if (resid > tolerance || -neg > tolerance)
    throw InfeasiblePlan("plan infeasible: residual " + std::to_string(resid) +
                         ", most negative entry " + std::to_string(neg));
  std::vector<std::pair<int, double>> out;
  out.reserve(game.terminals().size());
  for (int z : game.terminals()) {
    int pid = pairs.id(game.last_sequence(kP1, z), game.last_sequence(kP2, z));
    out.emplace_back(z, plan[pid]);
  }
  return out;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    q += c;
    if (c == '"') q += '"';
  }
  q += "\"";
  return q;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

char* format_double(char* buf, size_t n, double v) {
  snprintf(buf, n, "%.17g", v);
  return buf;
}

}  // namespace

void write_plan_csv(std::ostream& os, const GameTree& game, const RelevantPairs& pairs,
                    const CorrelationPlan& plan, const std::string& version_stamp) {
  if (!version_stamp.empty()) os << "# " << version_stamp << "\n";
  os << "seq1_infoset,seq1_action,seq2_infoset,seq2_action,value\n";
  char buf[64];
  for (int pid = 0; pid < pairs.size(); ++pid) {
    auto [s1, s2] = pairs.pair(pid);
    const SequenceKey& k1 = game.sequence(kP1, s1);
    const SequenceKey& k2 = game.sequence(kP2, s2);
    os << k1.infoset << ','
       << (k1.empty() ? "" : csv_quote(game.infoset(k1.infoset).actions[k1.action])) << ','
       << k2.infoset << ','
       << (k2.empty() ? "" : csv_quote(game.infoset(k2.infoset).actions[k2.action])) << ','
       << format_double(buf, sizeof buf, plan[pid]) << "\n";
  }
}

CorrelationPlan read_plan_csv(std::istream& is, const GameTree& game,
                              const RelevantPairs& pairs) {
  CorrelationPlan plan;
  plan.xi.assign(pairs.size(), 0.0);
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  auto seq_of = [&](PlayerId pl, const std::string& inf, const std::string& act) {
    int iid = std::stoi(inf);
    if (iid < 0) return 0;
    if (iid >= game.num_infosets()) throw ParseError("infoset " + inf + " out of range");
    const auto& actions = game.infoset(iid).actions;
    auto it = std::find(actions.begin(), actions.end(), act);
    if (it == actions.end())
      throw ParseError("action '" + act + "' not at infoset " + inf);
    return game.sequence_id(pl, iid, static_cast<int>(it - actions.begin()));
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // header row
      header_seen = true;
      continue;
    }
    auto f = csv_split(line);
    if (f.size() != 5)
      throw ParseError("plan CSV line " + std::to_string(lineno) + ": expected 5 fields");
    try {
      int s1 = seq_of(kP1, f[0], f[1]);
      int s2 = seq_of(kP2, f[2], f[3]);
      int pid = pairs.id(s1, s2);
      if (pid < 0)
        throw ParseError("plan CSV line " + std::to_string(lineno) + ": irrelevant pair");
      plan.xi[pid] = std::stod(f[4]);
    } catch (const std::invalid_argument&) {
      throw ParseError("plan CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  if (!header_seen) throw ParseError("plan CSV has no header");
  return plan;
}

}  // namespace efce
