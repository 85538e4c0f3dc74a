#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "efce/correlation.hpp"
#include "efce/game_tree.hpp"

namespace testsupport {

inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e591ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_str(uint64_t seed, const std::string& s) {
  uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (char c : s) h = mix64(h ^ static_cast<unsigned char>(c));
  return h;
}

struct RandomGameOptions {
  int max_depth = 4;
  int min_actions = 2;
  int max_actions = 3;
};

// Random two-player perfect-recall game.  Turn order is a function of the
// public transcript; an infoset is identified by (owner, owner's own
// action history, public transcript), so two nodes share an infoset exactly
// when the owner cannot tell them apart.  Each action is either public
// (appended to the transcript) or hidden (the transcript only records that
// the owner moved), which is what creates imperfect information.  All
// structural choices are hash-derived from the seed, so games are
// reproducible across platforms.
inline efce::GameTree random_game(uint64_t seed, RandomGameOptions opt = {}) {
  efce::GameTree g;
  struct Ctx {
    std::array<std::string, 2> own;
    std::string pub;
  };
  auto build = [&](auto&& self, int depth, const Ctx& ctx) -> int {
    uint64_t node_h = hash_str(seed, ctx.own[0] + "\x1f" + ctx.own[1] + "\x1f" + ctx.pub);
    bool terminal = depth >= opt.max_depth || (depth > 0 && node_h % 4 == 0);
    if (terminal) {
      auto payoff = [&](uint64_t salt) {
        int64_t raw = static_cast<int64_t>(mix64(node_h ^ salt) % 2001) - 1000;
        return static_cast<double>(raw) / 250.0;
      };
      return g.add_terminal(payoff(0x7571), payoff(0xd1ce));
    }
    int owner = static_cast<int>(hash_str(seed, "own\x1f" + ctx.pub) % 2);
    std::string key =
        "p" + std::to_string(owner) + "\x1f" + ctx.own[owner] + "\x1f" + ctx.pub;
    int span = opt.max_actions - opt.min_actions + 1;
    int n_act = opt.min_actions + static_cast<int>(hash_str(seed, "act\x1f" + key) % span);
    std::vector<std::string> labels;
    labels.reserve(n_act);
    for (int a = 0; a < n_act; ++a) labels.push_back("a" + std::to_string(a));
    int nd = g.add_decision(owner, key, labels);
    int iid = g.node(nd).infoset;
    for (int a = 0; a < n_act; ++a) {
      bool pub = hash_str(seed, "vis\x1f" + key + "\x1f" + labels[a]) % 2 == 0;
      Ctx next = ctx;
      next.own[owner] += std::to_string(iid) + ":" + labels[a] + ";";
      next.pub += "m" + std::to_string(owner) + (pub ? labels[a] : "*") + ";";
      g.link(nd, labels[a], self(self, depth + 1, next));
    }
    return nd;
  };
  build(build, 0, Ctx{});
  g.finalize();
  return g;
}

// Product of independent random behavioral strategies; always feasible.
inline efce::CorrelationPlan random_behavioral_plan(const efce::GameTree& g,
                                                    const efce::RelevantPairs& pairs,
                                                    uint64_t seed) {
  std::array<std::vector<double>, 2> reach;
  for (int p = 0; p < 2; ++p) {
    reach[p].assign(g.num_sequences(p), 1.0);
    for (int iid : g.infosets_of(p)) {
      int n = static_cast<int>(g.infoset(iid).actions.size());
      std::vector<double> w(n);
      double tot = 0.0;
      for (int a = 0; a < n; ++a) {
        w[a] = 0.25 + static_cast<double>(mix64(seed ^ (iid * 131ULL + a)) % 1000) / 1000.0;
        tot += w[a];
      }
      double parent = reach[p][g.parent_sequence(iid)];
      for (int a = 0; a < n; ++a)
        reach[p][g.sequence_id(p, iid, a)] = parent * w[a] / tot;
    }
  }
  efce::CorrelationPlan plan;
  plan.xi.assign(pairs.size(), 0.0);
  for (int pid = 0; pid < pairs.size(); ++pid) {
    auto [s1, s2] = pairs.pair(pid);
    plan.xi[pid] = reach[0][s1] * reach[1][s2];
  }
  return plan;
}

// Random distribution over n cells whose entries are dyadic rationals with a
// common power-of-two denominator.  Every entry and every partial sum of
// entries is exactly representable in double precision, so downstream
// summations incur no rounding at all.
inline std::vector<double> dyadic_mu(size_t n, uint64_t seed) {
  std::vector<uint64_t> c(n);
  uint64_t total = 0;
  for (size_t i = 0; i < n; ++i) {
    c[i] = 1 + mix64(seed ^ (0x51ed2701ULL + i)) % 255;
    total += c[i];
  }
  uint64_t denom = 1;
  while (denom < total) denom <<= 1;
  c[0] += denom - total;
  std::vector<double> mu(n);
  for (size_t i = 0; i < n; ++i)
    mu[i] = static_cast<double>(c[i]) / static_cast<double>(denom);
  return mu;
}

}  // namespace testsupport
