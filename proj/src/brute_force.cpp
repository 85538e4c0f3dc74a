#include "efce/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "efce/errors.hpp"

namespace efce {

namespace {

long sat_mul(long a, long b, long cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap / b + 1) return cap + 1;
  long r = a * b;
  return r > cap || r < 0 ? cap + 1 : r;
}

long sat_add(long a, long b, long cap) {
  long r = a + b;
  return r > cap || r < 0 ? cap + 1 : r;
}

// Count of reduced plans over the subtree rooted at one infoset.
long count_tree(const GameTree& game, PlayerId p, int iid, long cap) {
  const Infoset& info = game.infoset(iid);
  long total = 0;
  for (size_t a = 0; a < info.actions.size(); ++a) {
    int sid = game.sequence_id(p, iid, static_cast<int>(a));
    long branch = 1;
    for (int ch : game.children_infosets(p, sid)) {
      branch = sat_mul(branch, count_tree(game, p, ch, cap), cap);
    }
    total = sat_add(total, branch, cap);
  }
  return total;
}

using Choices = std::vector<std::pair<int, int>>;

void gen_tree(const GameTree& game, PlayerId p, int iid, std::vector<Choices>& out);

// Cross product of the plan sets of a list of root infosets.
void gen_forest(const GameTree& game, PlayerId p, const std::vector<int>& roots,
                std::vector<Choices>& out) {
  out.assign(1, Choices{});
  for (int root : roots) {
    std::vector<Choices> sub;
    gen_tree(game, p, root, sub);
    std::vector<Choices> next;
    next.reserve(out.size() * sub.size());
    for (const Choices& a : out) {
      for (const Choices& b : sub) {
        Choices merged = a;
        merged.insert(merged.end(), b.begin(), b.end());
        next.push_back(std::move(merged));
      }
    }
    out = std::move(next);
  }
}

void gen_tree(const GameTree& game, PlayerId p, int iid, std::vector<Choices>& out) {
  out.clear();
  const Infoset& info = game.infoset(iid);
  for (size_t a = 0; a < info.actions.size(); ++a) {
    int sid = game.sequence_id(p, iid, static_cast<int>(a));
    std::vector<Choices> below;
    gen_forest(game, p, game.children_infosets(p, sid), below);
    for (Choices& c : below) {
      c.push_back({iid, static_cast<int>(a)});
      out.push_back(std::move(c));
    }
  }
}

std::vector<ReducedPlan> finish_plans(PlayerId p, std::vector<Choices>&& raw) {
  std::vector<ReducedPlan> plans;
  plans.reserve(raw.size());
  for (Choices& c : raw) {
    std::sort(c.begin(), c.end());
    plans.push_back({p, std::move(c)});
  }
  return plans;
}

std::vector<int> root_infosets(const GameTree& game, PlayerId p) {
  std::vector<int> roots;
  for (int iid : game.infosets_of(p)) {
    if (game.parent_sequence(iid) == 0) roots.push_back(iid);
  }
  return roots;
}

}  // namespace

int ReducedPlan::action_at(int infoset) const {
  auto it = std::lower_bound(choices.begin(), choices.end(), std::make_pair(infoset, -1));
  if (it == choices.end() || it->first != infoset) return -1;
  return it->second;
}

std::vector<ReducedPlan> enumerate_plans(const GameTree& game, PlayerId p, long cap) {
  std::vector<int> roots = root_infosets(game, p);
  long count = 1;
  for (int root : roots) count = sat_mul(count, count_tree(game, p, root, cap), cap);
  if (count > cap) {
    throw TooLarge("player " + std::to_string(p + 1) + " has more than " + std::to_string(cap) +
                   " reduced plans");
  }
  std::vector<Choices> raw;
  gen_forest(game, p, roots, raw);
  return finish_plans(p, std::move(raw));
}

std::vector<ReducedPlan> enumerate_continuations(const GameTree& game, PlayerId p,
                                                 int root_infoset, long cap) {
  if (count_tree(game, p, root_infoset, cap) > cap) {
    throw TooLarge("more than " + std::to_string(cap) + " continuations below infoset " +
                   std::to_string(root_infoset));
  }
  std::vector<Choices> raw;
  gen_tree(game, p, root_infoset, raw);
  return finish_plans(p, std::move(raw));
}

bool plan_compatible(const GameTree& game, const ReducedPlan& plan, int sid) {
  while (sid != 0) {
    const SequenceKey& key = game.sequence(plan.player, sid);
    if (plan.action_at(key.infoset) != key.action) return false;
    sid = game.parent_sequence(key.infoset);
  }
  return true;
}

std::vector<double> random_mu(size_t n1, size_t n2, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> mu(n1 * n2);
  double total = 0.0;
  for (double& w : mu) {
    double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53;
    w = -std::log(u);
    total += w;
  }
  for (double& w : mu) w /= total;
  return mu;
}

CorrelationPlan xi_from_mu(const GameTree& game, const RelevantPairs& pairs,
                           const std::vector<ReducedPlan>& plans1,
                           const std::vector<ReducedPlan>& plans2,
                           const std::vector<double>& mu) {
  int n1 = game.num_sequences(kP1), n2 = game.num_sequences(kP2);
  size_t m1 = plans1.size(), m2 = plans2.size();

  auto compat_table = [&](const std::vector<ReducedPlan>& plans, PlayerId p, int nseq) {
    std::vector<std::vector<char>> table(plans.size(), std::vector<char>(nseq));
    for (size_t k = 0; k < plans.size(); ++k) {
      table[k][0] = 1;
      for (int sid = 1; sid < nseq; ++sid) {
        const SequenceKey& key = game.sequence(p, sid);
        int parent = game.parent_sequence(key.infoset);
        table[k][sid] = table[k][parent] && plans[k].action_at(key.infoset) == key.action;
      }
    }
    return table;
  };
  auto comp1 = compat_table(plans1, kP1, n1);
  auto comp2 = compat_table(plans2, kP2, n2);

  CorrelationPlan plan;
  plan.xi.assign(pairs.size(), 0.0);
  std::vector<double> w2(m2);
  for (int s1 = 0; s1 < n1; ++s1) {
    std::fill(w2.begin(), w2.end(), 0.0);
    for (size_t i = 0; i < m1; ++i) {
      if (!comp1[i][s1]) continue;
      const double* row = &mu[i * m2];
      for (size_t j = 0; j < m2; ++j) w2[j] += row[j];
    }
    for (int s2 = 0; s2 < n2; ++s2) {
      int pid = pairs.id(s1, s2);
      if (pid < 0) continue;
      double sum = 0.0;
      for (size_t j = 0; j < m2; ++j) {
        if (comp2[j][s2]) sum += w2[j];
      }
      plan[pid] = sum;
    }
  }
  return plan;
}

std::vector<TriggerGain> all_trigger_gains(const GameTree& game, const RelevantPairs& pairs,
                                           const CorrelationPlan& plan, long cap) {
  // Own decision steps along each terminal's root path, recovered from
  // parent pointers alone so this stays independent of the solver-side
  // trigger machinery.
  std::vector<std::vector<std::pair<int, int>>> steps[2];
  steps[0].resize(game.num_nodes());
  steps[1].resize(game.num_nodes());
  std::vector<int> last_sid[2];
  last_sid[0].assign(game.num_nodes(), 0);
  last_sid[1].assign(game.num_nodes(), 0);
  for (int z : game.terminals()) {
    std::vector<std::pair<int, int>> path;  // (node, action index) root-ward
    int cur = z;
    while (cur != 0) {
      int par = game.parent_node(cur);
      const Node& pn = game.node(par);
      int ai = -1;
      for (size_t a = 0; a < pn.children.size(); ++a) {
        if (pn.children[a].second == cur) ai = static_cast<int>(a);
      }
      path.push_back({par, ai});
      cur = par;
    }
    std::reverse(path.begin(), path.end());
    for (PlayerId p : {kP1, kP2}) {
      for (const auto& [node, ai] : path) {
        if (game.node(node).owner != p) continue;
        steps[p][z].push_back({game.node(node).infoset, ai});
      }
      if (!steps[p][z].empty()) {
        auto [iid, ai] = steps[p][z].back();
        last_sid[p][z] = game.sequence_id(p, iid, ai);
      }
    }
  }

  std::vector<TriggerGain> gains;
  std::vector<std::vector<ReducedPlan>> cont_cache(game.num_infosets());
  std::vector<char> cached(game.num_infosets(), 0);
  for (PlayerId p : {kP1, kP2}) {
    PlayerId opp = 1 - p;
    for (int sid = 1; sid < game.num_sequences(p); ++sid) {
      const SequenceKey& trig = game.sequence(p, sid);
      if (!cached[trig.infoset]) {
        cont_cache[trig.infoset] = enumerate_continuations(game, p, trig.infoset, cap);
        cached[trig.infoset] = 1;
      }

      double follow = 0.0;
      for (int z : game.terminals()) {
        bool plays_trigger = false;
        for (const auto& [iid, ai] : steps[p][z]) {
          if (iid == trig.infoset && ai == trig.action) plays_trigger = true;
        }
        if (!plays_trigger) continue;
        int pid = pairs.id(last_sid[kP1][z], last_sid[kP2][z]);
        follow += game.node(z).payoffs[p] * plan[pid];
      }

      TriggerGain out;
      out.player = p;
      out.trigger_sid = sid;
      bool first_cont = true;
      for (const ReducedPlan& cont : cont_cache[trig.infoset]) {
        double value = 0.0;
        for (int z : game.terminals()) {
          int hit = -1;
          const auto& own = steps[p][z];
          for (size_t k = 0; k < own.size(); ++k) {
            if (own[k].first == trig.infoset) {
              hit = static_cast<int>(k);
              break;
            }
          }
          if (hit < 0) continue;
          bool follows = true;
          for (size_t k = hit; k < own.size(); ++k) {
            if (cont.action_at(own[k].first) != own[k].second) {
              follows = false;
              break;
            }
          }
          if (!follows) continue;
          int opp_sid = last_sid[opp][z];
          int pid = p == kP1 ? pairs.id(sid, opp_sid) : pairs.id(opp_sid, sid);
          value += game.node(z).payoffs[p] * plan[pid];
        }
        double gain = value - follow;
        if (first_cont || gain > out.gain) {
          out.gain = gain;
          out.best = cont;
          first_cont = false;
        }
      }
      gains.push_back(std::move(out));
    }
  }
  return gains;
}

std::vector<TriggerGain> check_efce(const GameTree& game, const RelevantPairs& pairs,
                                    const CorrelationPlan& plan, double eps, long cap) {
  std::vector<TriggerGain> bad;
  for (TriggerGain& g : all_trigger_gains(game, pairs, plan, cap)) {
    if (g.gain > eps) bad.push_back(std::move(g));
  }
  return bad;
}

}  // namespace efce
