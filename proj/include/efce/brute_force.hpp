#pragma once

#include <cstdint>
#include <vector>

#include "efce/correlation.hpp"
#include "efce/game_tree.hpp"

namespace efce {

// A reduced pure plan: one action per infoset the player can actually reach
// given their own earlier choices; unreachable infosets carry no assignment.
struct ReducedPlan {
  PlayerId player = -1;
  std::vector<std::pair<int, int>> choices;  // (infoset, action), sorted by infoset

  int action_at(int infoset) const;  // -1 when unassigned
};

// All reduced plans of one player, in a fixed deterministic order.
// Throws TooLarge when the count exceeds `cap`.
std::vector<ReducedPlan> enumerate_plans(const GameTree& game, PlayerId p, long cap = 1000000);

// All reduced continuation plans over the infoset subtree rooted at
// `root_infoset` (the deviator's options after being told to enter it).
std::vector<ReducedPlan> enumerate_continuations(const GameTree& game, PlayerId p,
                                                 int root_infoset, long cap = 1000000);

// Whether the plan makes every own choice on the path to sequence `sid`.
bool plan_compatible(const GameTree& game, const ReducedPlan& plan, int sid);

// Dirichlet(1) weights over n1 x n2 joint pure plans, row-major, summing to
// one.  Fully determined by the seed.
std::vector<double> random_mu(size_t n1, size_t n2, uint64_t seed);

// The plan-polytope image of a joint distribution:
// xi[s1, s2] = P{ plan1 plays s1 and plan2 plays s2 }.
CorrelationPlan xi_from_mu(const GameTree& game, const RelevantPairs& pairs,
                           const std::vector<ReducedPlan>& plans1,
                           const std::vector<ReducedPlan>& plans2,
                           const std::vector<double>& mu);

// Best deviation gain for one trigger sequence, over exhaustively enumerated
// continuations, evaluated by walking terminal-to-root parent chains only.
struct TriggerGain {
  PlayerId player = -1;
  int trigger_sid = -1;
  double gain = 0.0;   // best continuation's gain; <= 0 means incentive-safe
  ReducedPlan best;    // a maximizing continuation
};

// Gains for every trigger of both players (Player 1 first, sequence order).
std::vector<TriggerGain> all_trigger_gains(const GameTree& game, const RelevantPairs& pairs,
                                           const CorrelationPlan& plan, long cap = 1000000);

// The triggers whose best deviation gains more than eps; empty means the
// plan passes the exhaustive incentive check.
std::vector<TriggerGain> check_efce(const GameTree& game, const RelevantPairs& pairs,
                                    const CorrelationPlan& plan, double eps,
                                    long cap = 1000000);

}  // namespace efce
