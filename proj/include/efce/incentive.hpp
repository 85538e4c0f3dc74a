#pragma once

#include <vector>

#include "efce/correlation.hpp"
#include "efce/game_tree.hpp"

namespace efce {

// Precomputed structure for one trigger sigma_hat = (I_hat, a_hat): the
// deviator's infoset subforest rooted at I_hat, the plan slots weighting each
// reachable terminal, and the compliance ("follow") terms over the terminals
// below the trigger sequence itself.  The incentive matrices act only
// through these slots; they are never materialized.
struct TriggerInfo {
  PlayerId player = -1;
  int trigger_sid = -1;
  int trigger_infoset = -1;
  // Infosets of the subforest, parents before children; local index 0 is
  // the trigger's own infoset.
  std::vector<int> subforest;
  struct SeqEntry {
    int seq = -1;                    // the deviator's sequence (I, a)
    std::vector<int> child_local;    // subforest-local children infosets
    // (pair id of (sigma_hat, opponent seq at z), deviator payoff at z)
    std::vector<std::pair<int, double>> weights;
  };
  std::vector<std::vector<SeqEntry>> actions;  // per local infoset, per action
  // (pair id of (sigma1(z), sigma2(z)), deviator payoff) over Z_trig.
  std::vector<std::pair<int, double>> follow_terms;
};

struct TriggerIndex {
  std::vector<TriggerInfo> triggers;  // Player 1 first, sequences root-first
  int n_pairs = 0;
};

TriggerIndex build_trigger_index(const GameTree& game, const RelevantPairs& pairs);

// Value of the best deviation continuation for one trigger, with the
// maximizing pure sequence-form plan (one chosen action per subforest
// infoset; ties go to the first action).
struct DeviationResult {
  double value = 0.0;
  std::vector<int> chosen;  // argmax action per subforest-local infoset
};

DeviationResult deviation_value(const TriggerInfo& trig, const CorrelationPlan& plan);

// Expands a deviation choice into 0/1 realization weights over the subforest
// sequences, indexed as [local infoset][action].
std::vector<std::vector<double>> deviation_realization(const TriggerInfo& trig,
                                                       const std::vector<int>& chosen);

struct VStarResult {
  double value = 0.0;
  int trigger = -1;  // index into TriggerIndex::triggers; -1 when no triggers
  DeviationResult best;
};

// Max deviation value over both players and all triggers; ties keep the
// first trigger in enumeration order.
VStarResult v_star(const TriggerIndex& index, const CorrelationPlan& plan, int threads = 1);

enum class Mode { Feasibility, MaxSW };

struct SubgradientInfo {
  double v_star = 0.0;
  double kappa = 0.0;          // tau - social welfare (MaxSW mode)
  double social_welfare = 0.0;
  bool sw_branch = false;      // true when the SW shortfall drove the step
  int trigger = -1;
};

// Subgradient of v*(xi) (Feasibility) or of max(v*(xi), tau - SW(xi))
// (MaxSW); `grad` is resized to the pair count and overwritten.
SubgradientInfo subgradient(const GameTree& game, const RelevantPairs& pairs,
                            const TriggerIndex& index, const CorrelationPlan& plan, Mode mode,
                            double tau, std::vector<double>& grad, int threads = 1);

}  // namespace efce
