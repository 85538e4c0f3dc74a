#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "efce/brute_force.hpp"
#include "efce/correlation.hpp"
#include "efce/errors.hpp"
#include "efce/game_tree.hpp"
#include "efce/generators.hpp"
#include "efce/incentive.hpp"
#include "support.hpp"

using namespace efce;
using testsupport::dyadic_mu;
using testsupport::mix64;
using testsupport::random_game;

namespace {

GameTree sheriff_game(int n_max, int b_max, int rounds) {
  SheriffParams prm;
  prm.n_max = n_max;
  prm.b_max = b_max;
  prm.rounds = rounds;
  return gen_sheriff(prm);
}

GameTree battleship_game(int h, int w, int rounds) {
  BattleshipParams prm;
  prm.height = h;
  prm.width = w;
  prm.ships = {{1, 1.0}};
  prm.rounds = rounds;
  prm.gamma = 2.0;
  return gen_battleship(prm);
}

// The unique decision point a player reaches right after taking `sid`.
int next_infoset(const GameTree& game, PlayerId p, int sid) {
  const std::vector<int>& kids = game.children_infosets(p, sid);
  REQUIRE(kids.size() == 1);
  return kids[0];
}

// Point mass on one joint pure plan pair.
std::vector<double> point_mu(size_t n1, size_t n2, size_t i, size_t j) {
  std::vector<double> mu(n1 * n2, 0.0);
  mu[i * n2 + j] = 1.0;
  return mu;
}

}  // namespace

TEST_CASE("reduced plan counts on the smallest smuggling games") {
  {
    GameTree g = sheriff_game(1, 0, 1);
    CHECK(enumerate_plans(g, kP1).size() == 2);
    CHECK(enumerate_plans(g, kP2).size() == 2);
  }
  {
    GameTree g = sheriff_game(1, 1, 1);
    CHECK(enumerate_plans(g, kP1).size() == 4);
    CHECK(enumerate_plans(g, kP2).size() == 4);
  }
  {
    // Three loads x 2 bribes each for the smuggler; the sheriff sees only
    // the bribe amount, so two independent binary responses.
    GameTree g = sheriff_game(2, 1, 1);
    CHECK(enumerate_plans(g, kP1).size() == 6);
    CHECK(enumerate_plans(g, kP2).size() == 4);
  }
}

TEST_CASE("plans are distinct, sorted, and cover reachable infosets only") {
  GameTree g = sheriff_game(1, 1, 1);
  for (PlayerId p : {kP1, kP2}) {
    std::vector<ReducedPlan> plans = enumerate_plans(g, p);
    std::set<std::vector<std::pair<int, int>>> seen;
    for (const ReducedPlan& plan : plans) {
      CHECK(plan.player == p);
      CHECK(std::is_sorted(plan.choices.begin(), plan.choices.end()));
      seen.insert(plan.choices);
      for (const auto& [iid, a] : plan.choices) {
        CHECK(g.infoset(iid).owner == p);
        CHECK(a >= 0);
        CHECK(a < static_cast<int>(g.infoset(iid).actions.size()));
        CHECK(plan.action_at(iid) == a);
      }
      CHECK(plan.action_at(999) == -1);
    }
    CHECK(seen.size() == plans.size());
  }
}

TEST_CASE("a player with no decisions has exactly one empty plan") {
  GameTree g;
  g.add_terminal(1.0, 2.0);
  g.finalize();
  for (PlayerId p : {kP1, kP2}) {
    std::vector<ReducedPlan> plans = enumerate_plans(g, p);
    REQUIRE(plans.size() == 1);
    CHECK(plans[0].choices.empty());
  }
}

TEST_CASE("enumeration respects the cap") {
  GameTree g = sheriff_game(2, 2, 2);
  CHECK_THROWS_AS(enumerate_plans(g, kP1, 3), TooLarge);
  CHECK_THROWS_AS(enumerate_continuations(g, kP2, g.infosets_of(kP2)[0], 1), TooLarge);
}

TEST_CASE("continuations branch only below the named root") {
  GameTree g = sheriff_game(1, 1, 2);
  int load = g.infosets_of(kP1)[0];
  int root = next_infoset(g, kP1, g.sequence_id(kP1, load, 1));
  std::vector<ReducedPlan> conts = enumerate_continuations(g, kP1, root);
  CHECK(conts.size() > 1);
  for (const ReducedPlan& c : conts) {
    CHECK(c.action_at(root) >= 0);
    CHECK(c.action_at(g.infosets_of(kP1)[0]) == -1);
  }
}

TEST_CASE("plan compatibility follows the player's own choices") {
  GameTree g = sheriff_game(1, 0, 1);
  int load = g.infosets_of(kP1)[0];
  std::vector<ReducedPlan> plans = enumerate_plans(g, kP1);
  int s_load0 = g.sequence_id(kP1, load, 0);
  int s_load1 = g.sequence_id(kP1, load, 1);
  for (const ReducedPlan& plan : plans) {
    CHECK(plan_compatible(g, plan, 0));
    int chosen = plan.action_at(load);
    CHECK(plan_compatible(g, plan, s_load0) == (chosen == 0));
    CHECK(plan_compatible(g, plan, s_load1) == (chosen == 1));
  }
}

TEST_CASE("point-mass distributions map to 0/1 compatibility indicators") {
  for (GameTree& g : std::vector<GameTree>{sheriff_game(1, 1, 1), battleship_game(2, 1, 1)}) {
    RelevantPairs pairs = RelevantPairs::build(g);
    std::vector<ReducedPlan> p1 = enumerate_plans(g, kP1);
    std::vector<ReducedPlan> p2 = enumerate_plans(g, kP2);
    for (size_t i = 0; i < p1.size(); ++i) {
      for (size_t j = 0; j < p2.size(); ++j) {
        CorrelationPlan xi = xi_from_mu(g, pairs, p1, p2, point_mu(p1.size(), p2.size(), i, j));
        for (int pid = 0; pid < pairs.size(); ++pid) {
          auto [s1, s2] = pairs.pair(pid);
          double want = plan_compatible(g, p1[i], s1) && plan_compatible(g, p2[j], s2) ? 1.0 : 0.0;
          CHECK(xi[pid] == want);
        }
      }
    }
  }
}

TEST_CASE("the plan-polytope image is linear in the distribution") {
  GameTree g = sheriff_game(1, 1, 1);
  RelevantPairs pairs = RelevantPairs::build(g);
  std::vector<ReducedPlan> p1 = enumerate_plans(g, kP1);
  std::vector<ReducedPlan> p2 = enumerate_plans(g, kP2);
  std::vector<double> a = random_mu(p1.size(), p2.size(), 5);
  std::vector<double> b = random_mu(p1.size(), p2.size(), 6);
  std::vector<double> blend(a.size());
  for (size_t k = 0; k < a.size(); ++k) blend[k] = 0.25 * a[k] + 0.75 * b[k];
  CorrelationPlan xa = xi_from_mu(g, pairs, p1, p2, a);
  CorrelationPlan xb = xi_from_mu(g, pairs, p1, p2, b);
  CorrelationPlan xc = xi_from_mu(g, pairs, p1, p2, blend);
  for (int pid = 0; pid < pairs.size(); ++pid) {
    CHECK(std::abs(xc[pid] - (0.25 * xa[pid] + 0.75 * xb[pid])) <= 1e-12);
  }
}

TEST_CASE("random distributions are deterministic, positive, and normalized") {
  std::vector<double> a = random_mu(4, 6, 99);
  std::vector<double> b = random_mu(4, 6, 99);
  CHECK(a == b);
  CHECK(random_mu(4, 6, 100) != a);
  double total = 0.0;
  for (double v : a) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("dyadic distributions satisfy every consistency row exactly") {
  std::vector<GameTree> games;
  games.push_back(sheriff_game(1, 0, 1));
  games.push_back(sheriff_game(1, 1, 1));
  games.push_back(sheriff_game(2, 1, 1));
  games.push_back(sheriff_game(1, 1, 2));
  games.push_back(battleship_game(2, 1, 1));
  for (GameTree& g : games) {
    RelevantPairs pairs = RelevantPairs::build(g);
    ConsistencySystems systems = build_consistency(g, pairs);
    std::vector<ReducedPlan> p1 = enumerate_plans(g, kP1);
    std::vector<ReducedPlan> p2 = enumerate_plans(g, kP2);
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<double> mu = dyadic_mu(p1.size() * p2.size(), mix64(777 + rep));
      CorrelationPlan xi = xi_from_mu(g, pairs, p1, p2, mu);
      CHECK(xi[pairs.id(0, 0)] == 1.0);
      CHECK(consistency_residual(systems, xi) == 0.0);
    }
  }
}

TEST_CASE("terminal pair mass equals the compatible plan mass") {
  GameTree g = sheriff_game(1, 1, 2);
  RelevantPairs pairs = RelevantPairs::build(g);
  std::vector<ReducedPlan> p1 = enumerate_plans(g, kP1);
  std::vector<ReducedPlan> p2 = enumerate_plans(g, kP2);
  std::vector<double> mu = random_mu(p1.size(), p2.size(), 31);
  CorrelationPlan xi = xi_from_mu(g, pairs, p1, p2, mu);
  for (int z : g.terminals()) {
    int s1 = g.last_sequence(kP1, z);
    int s2 = g.last_sequence(kP2, z);
    double mass = 0.0;
    for (size_t i = 0; i < p1.size(); ++i) {
      if (!plan_compatible(g, p1[i], s1)) continue;
      for (size_t j = 0; j < p2.size(); ++j) {
        if (plan_compatible(g, p2[j], s2)) mass += mu[i * p2.size() + j];
      }
    }
    CHECK(std::abs(xi[pairs.id(s1, s2)] - mass) <= 1e-12);
  }
}

TEST_CASE("trigger gains enumerate both players in sequence order") {
  GameTree g = sheriff_game(1, 1, 1);
  RelevantPairs pairs = RelevantPairs::build(g);
  CorrelationPlan xi = testsupport::random_behavioral_plan(g, pairs, 12);
  std::vector<TriggerGain> gains = all_trigger_gains(g, pairs, xi);
  REQUIRE(gains.size() ==
          static_cast<size_t>(g.num_sequences(kP1) - 1 + g.num_sequences(kP2) - 1));
  size_t k = 0;
  for (PlayerId p : {kP1, kP2}) {
    for (int sid = 1; sid < g.num_sequences(p); ++sid, ++k) {
      CHECK(gains[k].player == p);
      CHECK(gains[k].trigger_sid == sid);
      CHECK(gains[k].best.player == p);
    }
  }
}

TEST_CASE("a plan with a profitable lie is flagged at the right trigger") {
  GameTree g = sheriff_game(1, 0, 1);
  RelevantPairs pairs = RelevantPairs::build(g);
  int load = g.infosets_of(kP1)[0];
  int bribe0 = next_infoset(g, kP1, g.sequence_id(kP1, load, 0));
  int bribe1 = next_infoset(g, kP1, g.sequence_id(kP1, load, 1));
  int resp = g.infosets_of(kP2)[0];

  // Smuggler always loads the item, sheriff always inspects: hiding nothing
  // instead would avoid the fine, a gain of exactly 2 at the load trigger.
  CorrelationPlan xi;
  xi.xi.assign(pairs.size(), 0.0);
  auto set_path = [&](int iid, int a, double v) {
    int sid = g.sequence_id(kP1, iid, a);
    for (int s2 = 0; s2 < g.num_sequences(kP2); ++s2) {
      int pid = pairs.id(sid, s2);
      if (pid >= 0) xi.xi[pid] = v;
    }
  };
  for (int s2 = 0; s2 < g.num_sequences(kP2); ++s2) {
    int pid = pairs.id(0, s2);
    if (pid >= 0) xi.xi[pid] = 1.0;
  }
  set_path(load, 1, 1.0);
  set_path(bribe1, 0, 1.0);
  set_path(bribe0, 0, 1.0);

  // The sheriff's inspect action ("no", index 1) must carry the mass on
  // every P1 sequence.
  int inspect = g.sequence_id(kP2, resp, 1);
  const Infoset& resp_set = g.infoset(resp);
  REQUIRE(resp_set.actions.size() == 2);
  for (int s1 = 0; s1 < g.num_sequences(kP1); ++s1) {
    int keep = pairs.id(s1, inspect);
    int drop = pairs.id(s1, g.sequence_id(kP2, resp, 0));
    if (keep >= 0 && drop >= 0) {
      xi.xi[keep] = xi.xi[pairs.id(s1, 0)];
      xi.xi[drop] = 0.0;
    }
  }

  std::vector<TriggerGain> gains = all_trigger_gains(g, pairs, xi);
  double best = 0.0;
  int best_sid = -1;
  PlayerId best_player = -1;
  for (const TriggerGain& tg : gains) {
    if (tg.gain > best) {
      best = tg.gain;
      best_sid = tg.trigger_sid;
      best_player = tg.player;
    }
  }
  CHECK(best == doctest::Approx(2.0));
  CHECK(best_player == kP1);
  CHECK(best_sid == g.sequence_id(kP1, load, 1));

  CHECK(check_efce(g, pairs, xi, 2.5).empty());
  std::vector<TriggerGain> flagged = check_efce(g, pairs, xi, 1.5);
  REQUIRE(flagged.size() >= 1);
  bool found = false;
  for (const TriggerGain& tg : flagged) {
    if (tg.player == kP1 && tg.trigger_sid == g.sequence_id(kP1, load, 1)) found = true;
  }
  CHECK(found);
}

TEST_CASE("uniform joint play over random trees passes the incentive check at coarse eps") {
  for (uint64_t seed : {51u, 52u}) {
    GameTree g = random_game(seed);
    RelevantPairs pairs = RelevantPairs::build(g);
    std::vector<ReducedPlan> p1 = enumerate_plans(g, kP1);
    std::vector<ReducedPlan> p2 = enumerate_plans(g, kP2);
    std::vector<double> mu(p1.size() * p2.size(), 1.0 / double(p1.size() * p2.size()));
    CorrelationPlan xi = xi_from_mu(g, pairs, p1, p2, mu);
    std::vector<TriggerGain> gains = all_trigger_gains(g, pairs, xi);
    double worst = 0.0;
    for (const TriggerGain& tg : gains) worst = std::max(worst, tg.gain);
    CHECK(check_efce(g, pairs, xi, worst + 1e-9).empty());
    if (worst > 1e-9) CHECK_FALSE(check_efce(g, pairs, xi, worst - 1e-9).empty());
  }
}
