#include "efce/incentive.hpp"

#include <algorithm>
#include <cassert>

#include "efce/parallel.hpp"

namespace efce {

TriggerIndex build_trigger_index(const GameTree& game, const RelevantPairs& pairs) {
  TriggerIndex index;
  index.n_pairs = pairs.size();
  std::vector<int> local(game.num_infosets(), -1);

  for (PlayerId pl : {kP1, kP2}) {
    PlayerId opp = 1 - pl;
    for (int sid = 1; sid < game.num_sequences(pl); ++sid) {
      TriggerInfo trig;
      trig.player = pl;
      trig.trigger_sid = sid;
      trig.trigger_infoset = game.sequence(pl, sid).infoset;

      // Subforest: breadth-first from the trigger infoset through the
      // deviator's own sequences, so parents precede children.
      trig.subforest.push_back(trig.trigger_infoset);
      for (size_t qi = 0; qi < trig.subforest.size(); ++qi) {
        int iid = trig.subforest[qi];
        local[iid] = static_cast<int>(qi);
        int na = static_cast<int>(game.infoset(iid).actions.size());
        for (int a = 0; a < na; ++a)
          for (int ch : game.children_infosets(pl, game.sequence_id(pl, iid, a)))
            trig.subforest.push_back(ch);
      }

      trig.actions.resize(trig.subforest.size());
      for (size_t li = 0; li < trig.subforest.size(); ++li) {
        int iid = trig.subforest[li];
        int na = static_cast<int>(game.infoset(iid).actions.size());
        trig.actions[li].resize(na);
        for (int a = 0; a < na; ++a) {
          TriggerInfo::SeqEntry& e = trig.actions[li][a];
          e.seq = game.sequence_id(pl, iid, a);
          for (int ch : game.children_infosets(pl, e.seq)) e.child_local.push_back(local[ch]);
          for (int z : game.terminals_under(pl, e.seq)) {
            int so = game.last_sequence(opp, z);
            int pid = pl == kP1 ? pairs.id(sid, so) : pairs.id(so, sid);
            assert(pid >= 0 && "trigger weight hits an irrelevant pair");
            e.weights.emplace_back(pid, game.node(z).payoffs[pl]);
          }
        }
      }

      // Z_trig: terminals under the trigger sequence's own descendant closure.
      std::vector<int> seqs{sid};
      for (size_t qi = 0; qi < seqs.size(); ++qi) {
        for (int ch : game.children_infosets(pl, seqs[qi])) {
          int na = static_cast<int>(game.infoset(ch).actions.size());
          for (int a = 0; a < na; ++a) seqs.push_back(game.sequence_id(pl, ch, a));
        }
      }
      for (int s : seqs)
        for (int z : game.terminals_under(pl, s)) {
          int pid = pairs.id(game.last_sequence(kP1, z), game.last_sequence(kP2, z));
          trig.follow_terms.emplace_back(pid, game.node(z).payoffs[pl]);
        }

      for (int iid : trig.subforest) local[iid] = -1;
      index.triggers.push_back(std::move(trig));
    }
  }
  return index;
}

DeviationResult deviation_value(const TriggerInfo& trig, const CorrelationPlan& plan) {
  DeviationResult res;
  const int m = static_cast<int>(trig.subforest.size());
  res.chosen.assign(m, 0);
  std::vector<double> value(m, 0.0);
  // Children-first pass (the subforest is stored parents-first).
  for (int li = m - 1; li >= 0; --li) {
    double best = 0.0;
    int best_a = 0;
    for (int a = 0; a < static_cast<int>(trig.actions[li].size()); ++a) {
      const TriggerInfo::SeqEntry& e = trig.actions[li][a];
      double v = 0.0;
      for (const auto& [pid, u] : e.weights) v += u * plan[pid];
      for (int ch : e.child_local) v += value[ch];
      if (a == 0 || v > best) {
        best = v;
        best_a = a;
      }
    }
    value[li] = best;
    res.chosen[li] = best_a;
  }
  double follow = 0.0;
  for (const auto& [pid, u] : trig.follow_terms) follow += u * plan[pid];
  res.value = value[0] - follow;
  return res;
}

std::vector<std::vector<double>> deviation_realization(const TriggerInfo& trig,
                                                       const std::vector<int>& chosen) {
  const int m = static_cast<int>(trig.subforest.size());
  std::vector<double> reach(m, 0.0);
  reach[0] = 1.0;
  std::vector<std::vector<double>> y(m);
  for (int li = 0; li < m; ++li) {
    y[li].assign(trig.actions[li].size(), 0.0);
    if (reach[li] == 0.0) continue;
    int a = chosen[li];
    y[li][a] = reach[li];
    for (int ch : trig.actions[li][a].child_local) reach[ch] = reach[li];
  }
  return y;
}

VStarResult v_star(const TriggerIndex& index, const CorrelationPlan& plan, int threads) {
  const int nt = static_cast<int>(index.triggers.size());
  VStarResult res;
  if (nt == 0) return res;
  std::vector<DeviationResult> per(nt);
  parallel_for(threads, nt,
               [&](int t) { per[t] = deviation_value(index.triggers[t], plan); });
  res.trigger = 0;
  res.best = std::move(per[0]);
  res.value = res.best.value;
  for (int t = 1; t < nt; ++t) {
    if (per[t].value > res.value) {
      res.value = per[t].value;
      res.trigger = t;
      res.best = std::move(per[t]);
    }
  }
  return res;
}

namespace {

// Scatter of the active-piece gradient: +u weights on the reached terminals
// of the subforest, -u on the compliance terms.
void add_trigger_gradient(const TriggerInfo& trig, const std::vector<int>& chosen,
                          std::vector<double>& grad) {
  const int m = static_cast<int>(trig.subforest.size());
  std::vector<uint8_t> reach(m, 0);
  reach[0] = 1;
  for (int li = 0; li < m; ++li) {
    if (!reach[li]) continue;
    const TriggerInfo::SeqEntry& e = trig.actions[li][chosen[li]];
    for (const auto& [pid, u] : e.weights) grad[pid] += u;
    for (int ch : e.child_local) reach[ch] = 1;
  }
  for (const auto& [pid, u] : trig.follow_terms) grad[pid] -= u;
}

}  // namespace

SubgradientInfo subgradient(const GameTree& game, const RelevantPairs& pairs,
                            const TriggerIndex& index, const CorrelationPlan& plan, Mode mode,
                            double tau, std::vector<double>& grad, int threads) {
  SubgradientInfo info;
  grad.assign(pairs.size(), 0.0);
  VStarResult vs = v_star(index, plan, threads);
  info.v_star = vs.value;
  info.trigger = vs.trigger;
  if (mode == Mode::MaxSW) {
    info.social_welfare = social_welfare(game, pairs, plan);
    info.kappa = tau - info.social_welfare;
    // Ties fall to the trigger branch.
    if (vs.value >= info.kappa) {
      if (vs.trigger >= 0)
        add_trigger_gradient(index.triggers[vs.trigger], vs.best.chosen, grad);
    } else {
      info.sw_branch = true;
      for (int z : game.terminals()) {
        int pid = pairs.id(game.last_sequence(kP1, z), game.last_sequence(kP2, z));
        grad[pid] -= game.node(z).payoffs[0] + game.node(z).payoffs[1];
      }
    }
  } else {
    info.social_welfare = social_welfare(game, pairs, plan);
    if (vs.trigger >= 0) add_trigger_gradient(index.triggers[vs.trigger], vs.best.chosen, grad);
  }
  return info;
}

}  // namespace efce
