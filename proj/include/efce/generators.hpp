#pragma once

#include <string>
#include <vector>

#include "efce/game_tree.hpp"

namespace efce {

struct Ship {
  int length = 1;
  double value = 1.0;
};

struct BattleshipParams {
  int height = 1;
  int width = 1;
  std::vector<Ship> ships{{1, 1.0}};
  int rounds = 1;
  double gamma = 1.0;  // own-loss multiplier, >= 1
  bool allow_repeat_shots = false;
  long max_nodes = 1'000'000;
};

struct SheriffParams {
  double v = 5.0;  // value per smuggled item
  double p = 1.0;  // per-item penalty when caught
  double s = 1.0;  // compensation after a false alarm
  int n_max = 10;
  int b_max = 2;
  int rounds = 2;
  long max_nodes = 1'000'000;
};

// Two grids, alternating private ship placement (Player 1 first, ships in
// list order), then alternating shots (Player 1 first) with public
// hit/miss/sunk announcements.  Ends after `rounds` shots per player or when
// one fleet is destroyed.  Terminal payoff per player: sum of destroyed
// opponent ship values minus gamma times the sum of own lost values.
// Throws Unsatisfiable when the fleet admits no legal placement and TooLarge
// when the tree exceeds max_nodes.
GameTree gen_battleship(const BattleshipParams& params);

// The Smuggler (Player 1) privately loads n in {0..n_max}; `rounds` public
// bargaining rounds of (bribe in {0..b_max}, then yes/no by the Sheriff);
// only the last round is consequential: yes -> (n*v - b, b); no with n > 0 ->
// (-n*p, n*p); no with n = 0 -> (s, -s).
GameTree gen_sheriff(const SheriffParams& params);

// Parses a "LxV,LxV,..." ship list, e.g. "1x1,2x3.5".
std::vector<Ship> parse_ships(const std::string& text);

}  // namespace efce
