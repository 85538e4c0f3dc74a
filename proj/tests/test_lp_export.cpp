#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "efce/brute_force.hpp"
#include "efce/correlation.hpp"
#include "efce/errors.hpp"
#include "efce/game_tree.hpp"
#include "efce/generators.hpp"
#include "efce/incentive.hpp"
#include "efce/lp_export.hpp"
#include "support.hpp"

using namespace efce;
using testsupport::mix64;
using testsupport::random_behavioral_plan;
using testsupport::random_game;

namespace {

struct Fixture {
  GameTree game;
  RelevantPairs pairs;
  TriggerIndex index;

  explicit Fixture(GameTree g) : game(std::move(g)) {
    pairs = RelevantPairs::build(game);
    index = build_trigger_index(game, pairs);
  }
};

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

GameTree one_terminal_game() {
  GameTree g;
  g.add_terminal(3.0, -1.0, "only");
  g.finalize();
  return g;
}

std::string render(const LPModel& model, LPFileFormat fmt) {
  std::ostringstream os;
  write_lp(model, os, fmt);
  return os.str();
}

void check_same_model(const LPModel& a, const LPModel& b) {
  CHECK(a.name == b.name);
  CHECK(a.maximize == b.maximize);
  CHECK(a.n_xi == b.n_xi);
  REQUIRE(a.vars.size() == b.vars.size());
  for (size_t i = 0; i < a.vars.size(); ++i) {
    CHECK(a.vars[i].name == b.vars[i].name);
    CHECK(a.vars[i].free_sign == b.vars[i].free_sign);
  }
  REQUIRE(a.objective == b.objective);
  REQUIRE(a.cons.size() == b.cons.size());
  for (size_t i = 0; i < a.cons.size(); ++i) {
    CHECK(a.cons[i].name == b.cons[i].name);
    CHECK(a.cons[i].sense == b.cons[i].sense);
    CHECK(a.cons[i].rhs == b.cons[i].rhs);
    CHECK(a.cons[i].terms == b.cons[i].terms);
  }
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

// Full assignment vector in model variable order: plan entries, then the
// per-trigger dual blocks, then (for MinDeviation) the deviation bound.
std::vector<double> assemble_assignment(const LPModel& model, const TriggerIndex& index,
                                        const CorrelationPlan& plan,
                                        const std::vector<std::vector<double>>& duals,
                                        double dev_bound) {
  std::vector<double> x(plan.xi.begin(), plan.xi.end());
  for (size_t t = 0; t < index.triggers.size(); ++t) {
    x.insert(x.end(), duals[t].begin(), duals[t].end());
  }
  if (static_cast<int>(x.size()) < static_cast<int>(model.vars.size())) x.push_back(dev_bound);
  REQUIRE(x.size() == model.vars.size());
  return x;
}

// Per-infoset optimal continuation values for one trigger, children first.
std::vector<double> continuation_values(const TriggerInfo& trig, const CorrelationPlan& plan) {
  const int m = static_cast<int>(trig.subforest.size());
  std::vector<double> value(m, 0.0);
  for (int li = m - 1; li >= 0; --li) {
    double best = -std::numeric_limits<double>::infinity();
    for (const TriggerInfo::SeqEntry& e : trig.actions[li]) {
      double w = 0.0;
      for (const auto& [pid, u] : e.weights) w += u * plan.xi[pid];
      for (int ch : e.child_local) w += value[ch];
      best = std::max(best, w);
    }
    value[li] = best;
  }
  return value;
}

}  // namespace

TEST_CASE("one-terminal game produces the minimal model") {
  GameTree game = one_terminal_game();

  LPModel feas = build_lp(game, LPFormulation::FeasDeviation);
  CHECK(feas.name == "efce_feas_dev");
  CHECK_FALSE(feas.maximize);
  CHECK(feas.n_xi == 1);
  REQUIRE(feas.vars.size() == 1);
  CHECK(feas.vars[0].name == "xi_0");
  CHECK_FALSE(feas.vars[0].free_sign);
  CHECK(feas.objective.empty());
  REQUIRE(feas.cons.size() == 1);
  CHECK(feas.cons[0].name == "norm");
  CHECK(feas.cons[0].sense == 'E');
  CHECK(feas.cons[0].rhs == 1.0);
  REQUIRE(feas.cons[0].terms.size() == 1);
  CHECK(feas.cons[0].terms[0] == std::pair<int, double>{0, 1.0});

  LPModel maxsw = build_lp(game, LPFormulation::MaximumSW);
  CHECK(maxsw.maximize);
  REQUIRE(maxsw.objective.size() == 1);
  CHECK(maxsw.objective[0] == std::pair<int, double>{0, 2.0});
}

TEST_CASE("variable order and naming follow the documented layout") {
  Fixture fx(sheriff_game(1, 1, 1));
  LPModel model = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MinDeviation);

  CHECK(model.n_xi == fx.pairs.size());
  for (int pid = 0; pid < model.n_xi; ++pid) {
    CHECK(model.vars[pid].name == "xi_" + std::to_string(pid));
    CHECK_FALSE(model.vars[pid].free_sign);
  }
  size_t at = static_cast<size_t>(model.n_xi);
  for (const TriggerInfo& trig : fx.index.triggers) {
    std::string stem =
        "nu_p" + std::to_string(trig.player) + "_s" + std::to_string(trig.trigger_sid) + "_i";
    for (int iid : trig.subforest) {
      REQUIRE(at < model.vars.size());
      CHECK(model.vars[at].name == stem + std::to_string(iid));
      CHECK(model.vars[at].free_sign);
      ++at;
    }
  }
  REQUIRE(at + 1 == model.vars.size());
  CHECK(model.vars[at].name == "u_dev");
  CHECK(model.vars[at].free_sign);

  std::set<std::string> var_names, con_names;
  for (const auto& v : model.vars) var_names.insert(v.name);
  for (const auto& c : model.cons) con_names.insert(c.name);
  CHECK(var_names.size() == model.vars.size());
  CHECK(con_names.size() == model.cons.size());

  for (const auto& c : model.cons) {
    bool known = c.name == "norm" || starts_with(c.name, "c1_s") || starts_with(c.name, "c2_s") ||
                 starts_with(c.name, "tr_p") || starts_with(c.name, "cap_p");
    CHECK(known);
    if (starts_with(c.name, "c1_") || starts_with(c.name, "c2_") || c.name == "norm") {
      CHECK(c.sense == 'E');
    } else {
      CHECK(c.sense == 'L');
      CHECK(c.rhs == 0.0);
    }
  }
}

TEST_CASE("constraint families have the expected cardinalities") {
  for (GameTree& game : std::vector<GameTree>{sheriff_game(2, 1, 1), battleship_game(2, 1, 2)}) {
    Fixture fx(std::move(game));
    LPModel model = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::FeasDeviation);

    int want_c1 = 0, want_c2 = 0;
    for (int s2 = 0; s2 < fx.game.num_sequences(kP2); ++s2) {
      for (int iid : fx.game.infosets_of(kP1)) {
        if (fx.pairs.relevant_col(iid, s2)) ++want_c1;
      }
    }
    for (int s1 = 0; s1 < fx.game.num_sequences(kP1); ++s1) {
      for (int iid : fx.game.infosets_of(kP2)) {
        if (fx.pairs.relevant_row(s1, iid)) ++want_c2;
      }
    }
    int want_tr = 0;
    for (const TriggerInfo& trig : fx.index.triggers) {
      for (const auto& entries : trig.actions) want_tr += static_cast<int>(entries.size());
    }
    int want_cap = static_cast<int>(fx.index.triggers.size());

    int got_c1 = 0, got_c2 = 0, got_tr = 0, got_cap = 0, got_norm = 0;
    for (const auto& c : model.cons) {
      if (c.name == "norm") ++got_norm;
      else if (starts_with(c.name, "c1_")) ++got_c1;
      else if (starts_with(c.name, "c2_")) ++got_c2;
      else if (starts_with(c.name, "tr_")) ++got_tr;
      else if (starts_with(c.name, "cap_")) ++got_cap;
    }
    CHECK(got_norm == 1);
    CHECK(got_c1 == want_c1);
    CHECK(got_c2 == want_c2);
    CHECK(got_tr == want_tr);
    CHECK(got_cap == want_cap);
    CHECK(model.cons.size() == static_cast<size_t>(1 + want_c1 + want_c2 + want_tr + want_cap));
  }
}

TEST_CASE("every plan variable appears in at least one constraint") {
  for (GameTree& game : std::vector<GameTree>{battleship_game(3, 1, 2), sheriff_game(2, 2, 1),
                                              random_game(404)}) {
    Fixture fx(std::move(game));
    LPModel model = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MinDeviation);
    std::vector<int> hits(model.vars.size(), 0);
    for (const auto& c : model.cons) {
      for (const auto& [var, coeff] : c.terms) {
        REQUIRE(var >= 0);
        REQUIRE(var < static_cast<int>(model.vars.size()));
        CHECK(coeff != 0.0);
        ++hits[var];
      }
    }
    for (size_t v = 0; v < hits.size(); ++v) CHECK(hits[v] >= 1);
  }
}

TEST_CASE("objective senses and contents per formulation") {
  Fixture fx(sheriff_game(2, 1, 1));

  LPModel min_dev = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MinDeviation);
  CHECK_FALSE(min_dev.maximize);
  REQUIRE(min_dev.objective.size() == 1);
  CHECK(min_dev.objective[0].first == static_cast<int>(min_dev.vars.size()) - 1);
  CHECK(min_dev.objective[0].second == 1.0);

  LPModel feas = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::FeasDeviation);
  CHECK_FALSE(feas.maximize);
  CHECK(feas.objective.empty());

  LPModel max_sw = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MaximumSW);
  CHECK(max_sw.maximize);
  CHECK_FALSE(max_sw.objective.empty());
  std::map<int, double> want;
  for (int z : fx.game.terminals()) {
    const Node& node = fx.game.node(z);
    int pid = fx.pairs.id(fx.game.last_sequence(kP1, z), fx.game.last_sequence(kP2, z));
    want[pid] += node.payoffs[0] + node.payoffs[1];
  }
  for (const auto& [var, coeff] : max_sw.objective) {
    CHECK(var < max_sw.n_xi);
    REQUIRE(want.count(var) == 1);
    CHECK(coeff == want[var]);
  }
  size_t nonzero = 0;
  for (const auto& [pid, coeff] : want) {
    (void)pid;
    if (coeff != 0.0) ++nonzero;
  }
  CHECK(max_sw.objective.size() == nonzero);
}

TEST_CASE("deviation bound is the only difference between the two feasibility forms") {
  Fixture fx(sheriff_game(1, 1, 2));
  LPModel min_dev = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MinDeviation);
  LPModel feas = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::FeasDeviation);

  REQUIRE(min_dev.vars.size() == feas.vars.size() + 1);
  for (size_t i = 0; i < feas.vars.size(); ++i) {
    CHECK(min_dev.vars[i].name == feas.vars[i].name);
    CHECK(min_dev.vars[i].free_sign == feas.vars[i].free_sign);
  }
  const int u_var = static_cast<int>(min_dev.vars.size()) - 1;

  REQUIRE(min_dev.cons.size() == feas.cons.size());
  for (size_t i = 0; i < feas.cons.size(); ++i) {
    const auto& a = min_dev.cons[i];
    const auto& b = feas.cons[i];
    CHECK(a.name == b.name);
    CHECK(a.sense == b.sense);
    CHECK(a.rhs == b.rhs);
    if (starts_with(a.name, "cap_")) {
      REQUIRE(a.terms.size() == b.terms.size() + 1);
      for (size_t k = 0; k < b.terms.size(); ++k) CHECK(a.terms[k] == b.terms[k]);
      CHECK(a.terms.back() == std::pair<int, double>{u_var, -1.0});
    } else {
      CHECK(a.terms == b.terms);
    }
  }
}

TEST_CASE("written files parse back to the same model in both formats") {
  std::vector<GameTree> games;
  games.push_back(sheriff_game(1, 1, 1));
  games.push_back(battleship_game(2, 1, 1));
  games.push_back(random_game(88));
  for (GameTree& game : games) {
    Fixture fx(std::move(game));
    for (LPFormulation form : {LPFormulation::MinDeviation, LPFormulation::FeasDeviation,
                               LPFormulation::MaximumSW}) {
      LPModel model = build_lp(fx.game, fx.pairs, fx.index, form);
      check_same_model(model, parse_lp_text(render(model, LPFileFormat::LPText)));
      check_same_model(model, parse_mps(render(model, LPFileFormat::MPS)));
    }
  }
}

TEST_CASE("model build and both writers are deterministic") {
  Fixture fx(sheriff_game(2, 1, 1));
  LPModel a = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MaximumSW);
  LPModel b = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MaximumSW);
  check_same_model(a, b);
  CHECK(render(a, LPFileFormat::LPText) == render(b, LPFileFormat::LPText));
  CHECK(render(a, LPFileFormat::MPS) == render(b, LPFileFormat::MPS));
}

TEST_CASE("optimal continuation values certify every incentive row") {
  std::vector<GameTree> games;
  games.push_back(sheriff_game(1, 1, 1));
  games.push_back(sheriff_game(2, 1, 1));
  games.push_back(battleship_game(2, 1, 1));
  for (GameTree& game : games) {
    Fixture fx(std::move(game));
    LPModel model = build_lp(fx.game, fx.pairs, fx.index, LPFormulation::MinDeviation);

    std::vector<ReducedPlan> p1 = enumerate_plans(fx.game, kP1);
    std::vector<ReducedPlan> p2 = enumerate_plans(fx.game, kP2);
    for (int rep = 0; rep < 8; ++rep) {
      uint64_t seed = 9000 + rep;
      CorrelationPlan plan;
      if (rep % 2 == 0) {
        plan = random_behavioral_plan(fx.game, fx.pairs, seed);
      } else {
        std::vector<double> mu = random_mu(p1.size(), p2.size(), seed);
        plan = xi_from_mu(fx.game, fx.pairs, p1, p2, mu);
      }

      std::vector<std::vector<double>> duals;
      for (const TriggerInfo& trig : fx.index.triggers) {
        std::vector<double> value = continuation_values(trig, plan);
        double follow = 0.0;
        for (const auto& [pid, u] : trig.follow_terms) follow += u * plan.xi[pid];
        DeviationResult dev = deviation_value(trig, plan);
        CHECK(value[0] - follow == doctest::Approx(dev.value).epsilon(1e-12));
        duals.push_back(std::move(value));
      }
      double bound = v_star(fx.index, plan).value;
      std::vector<double> x = assemble_assignment(model, fx.index, plan, duals, bound);

      for (const auto& c : model.cons) {
        double lhs = 0.0;
        double scale = 1.0;
        for (const auto& [var, coeff] : c.terms) {
          lhs += coeff * x[var];
          scale = std::max(scale, std::abs(coeff * x[var]));
        }
        if (c.sense == 'L') {
          CHECK(lhs <= c.rhs + 1e-9 * scale);
        } else if (rep % 2 == 1) {
          CHECK(std::abs(lhs - c.rhs) <= 1e-9 * scale);
        }
      }
    }
  }
}

TEST_CASE("parsers reject malformed input") {
  CHECK_THROWS_AS(parse_lp_text(""), ParseError);
  CHECK_THROWS_AS(parse_lp_text("Minimize\n obj:\nSubject To\n r: 1 xi_0 >= 2\nBounds\n"
                                " xi_0 >= 0\nEnd\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_lp_text("Minimize\n obj: 1 ghost\nSubject To\nBounds\nEnd\n"), ParseError);
  CHECK_THROWS_AS(parse_mps(""), ParseError);
  CHECK_THROWS_AS(parse_mps("NAME t\nROWS\n N obj\nCOLUMNS\n    x nope 1\nENDATA\n"), ParseError);
  CHECK_THROWS_AS(parse_mps("NAME t\nROWS\n G r\nENDATA\n"), ParseError);
}
