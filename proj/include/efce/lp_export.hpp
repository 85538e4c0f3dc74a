#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "efce/correlation.hpp"
#include "efce/game_tree.hpp"
#include "efce/incentive.hpp"

namespace efce {

enum class LPFormulation { MinDeviation, FeasDeviation, MaximumSW };
enum class LPFileFormat { LPText, MPS };

// A fully ordered linear program: plan variables first (one per relevant
// pair, nonnegative), then one free dual block per trigger (one entry per
// subforest infoset), then the free deviation bound u (MinDeviation only).
// Ordering is part of the file contract; identical inputs give identical
// models and therefore identical files.
struct LPModel {
  struct Var {
    std::string name;
    bool free_sign = false;
  };
  struct Constraint {
    std::string name;
    char sense = 'L';  // 'E' equality, 'L' less-or-equal
    double rhs = 0.0;
    std::vector<std::pair<int, double>> terms;  // sorted by var index, coalesced
  };

  std::string name;
  bool maximize = false;
  int n_xi = 0;
  std::vector<Var> vars;
  std::vector<std::pair<int, double>> objective;
  std::vector<Constraint> cons;
};

LPModel build_lp(const GameTree& game, const RelevantPairs& pairs, const TriggerIndex& index,
                 LPFormulation formulation);
LPModel build_lp(const GameTree& game, LPFormulation formulation);

void write_lp(const LPModel& model, std::ostream& os, LPFileFormat format);
void write_lp_file(const LPModel& model, const std::string& path, LPFileFormat format);

// Readers for the two formats above, used to check written files round-trip.
// They accept only this writer's grammar.
LPModel parse_lp_text(const std::string& text);
LPModel parse_mps(const std::string& text);

}  // namespace efce
