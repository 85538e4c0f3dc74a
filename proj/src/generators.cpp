#include "efce/generators.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

namespace efce {

namespace {

struct Cell {
  int x = 0, y = 0;
  bool operator==(const Cell&) const = default;
};

using CellMask = uint64_t;  // bit x + y*width

int bit(int x, int y, int width) { return x + y * width; }

struct Placement {
  std::string label;  // "x,y,h" or "x,y,v"
  CellMask mask = 0;
};

// All placements of one ship length, lexicographic by (x, y, orientation).
// Length-1 ships get the horizontal orientation only (both would coincide).
std::vector<Placement> placements_of(int height, int width, int length) {
  std::vector<Placement> out;
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      if (x + length <= width) {
        CellMask m = 0;
        for (int k = 0; k < length; ++k) m |= CellMask(1) << bit(x + k, y, width);
        out.push_back({std::to_string(x) + "," + std::to_string(y) + ",h", m});
      }
      if (length > 1 && y + length <= height) {
        CellMask m = 0;
        for (int k = 0; k < length; ++k) m |= CellMask(1) << bit(x, y + k, width);
        out.push_back({std::to_string(x) + "," + std::to_string(y) + ",v", m});
      }
    }
  }
  return out;
}

// True when ships[from..] can all be placed disjointly outside `used`.
bool completable(const std::vector<std::vector<Placement>>& options, size_t from,
                 CellMask used) {
  if (from == options.size()) return true;
  for (const Placement& pl : options[from])
    if (!(pl.mask & used) && completable(options, from + 1, used | pl.mask)) return true;
  return false;
}

struct BattleshipBuilder {
  const BattleshipParams& prm;
  GameTree& g;
  std::vector<std::vector<Placement>> options;  // per ship index
  int cells_total;
  long node_budget;

  void check_budget() {
    if (g.num_nodes() > node_budget)
      throw TooLarge("battleship tree exceeds max_nodes = " + std::to_string(node_budget));
  }

  std::vector<int> legal_placements(size_t ship_idx, CellMask used) const {
    std::vector<int> out;
    for (size_t k = 0; k < options[ship_idx].size(); ++k) {
      const Placement& pl = options[ship_idx][k];
      if (!(pl.mask & used) && completable(options, ship_idx + 1, used | pl.mask))
        out.push_back(static_cast<int>(k));
    }
    return out;
  }

  struct Side {
    std::vector<int> placed;  // placement option index per ship
    CellMask owned = 0;
    CellMask shots = 0;  // cells this side has fired at
    std::vector<CellMask> hits;  // cells of each own ship hit by the opponent
    std::string placement_str() const {
      std::string s;
      for (int k : placed) s += std::to_string(k) + ";";
      return s;
    }
    bool fleet_destroyed(const std::vector<std::vector<Placement>>& options) const {
      for (size_t i = 0; i < placed.size(); ++i)
        if (hits[i] != options[i][placed[i]].mask) return false;
      return !placed.empty();
    }
  };

  // Placement phase: placement k (0-based over both players) belongs to
  // player k % 2 and concerns ship k / 2.
  void place(int parent, const std::string& via, size_t k, Side s1, Side s2) {
    check_budget();
    size_t nships = prm.ships.size();
    if (k == 2 * nships) {
      shoot(parent, via, std::move(s1), std::move(s2), kP1, 0);
      return;
    }
    PlayerId pl = static_cast<PlayerId>(k % 2);
    size_t ship_idx = k / 2;
    Side& own = (pl == kP1) ? s1 : s2;
    std::vector<int> legal = legal_placements(ship_idx, own.owned);
    if (legal.empty()) throw Unsatisfiable("no legal placement for ship " +
                                           std::to_string(ship_idx));
    // Opponents observe only how many ships are down, which the phase index
    // already fixes, so the key needs only the player's own placements.
    std::string key = "place|p" + std::to_string(pl) + "|" + own.placement_str();
    std::vector<std::string> labels;
    labels.reserve(legal.size());
    for (int idx : legal) labels.push_back(options[ship_idx][idx].label);
    int nd = g.add_decision(pl, key, labels);
    if (parent >= 0) g.link(parent, via, nd);
    for (size_t li = 0; li < legal.size(); ++li) {
      Side own2 = own;
      own2.placed.push_back(legal[li]);
      own2.owned |= options[ship_idx][legal[li]].mask;
      own2.hits.push_back(0);
      if (pl == kP1)
        place(nd, labels[li], k + 1, own2, s2);
      else
        place(nd, labels[li], k + 1, s1, own2);
    }
  }

  // Shooting phase. `fired` counts completed shots of the player to act;
  // both players have fired `rounds` shots when the turn returns to Player 1
  // with fired == rounds.
  void shoot(int parent, const std::string& via, Side s1, Side s2, PlayerId turn,
             int fired_by_p1, std::string hist = "") {
    check_budget();
    if (turn == kP1 && fired_by_p1 == prm.rounds) {
      finish(parent, via, s1, s2, hist);
      return;
    }
    Side& me = (turn == kP1) ? s1 : s2;
    Side& opp = (turn == kP1) ? s2 : s1;
    // Lexicographic (x, y) order to match placement ordering.
    std::vector<std::pair<std::string, Cell>> cells;
    for (int x = 0; x < prm.width; ++x)
      for (int y = 0; y < prm.height; ++y) {
        if (!prm.allow_repeat_shots && (me.shots >> bit(x, y, prm.width)) & 1) continue;
        cells.push_back({std::to_string(x) + "," + std::to_string(y), {x, y}});
      }
    std::string key = "shoot|p" + std::to_string(turn) + "|" + me.placement_str() + "|" + hist;
    std::vector<std::string> labels;
    for (const auto& [lab, c] : cells) {
      (void)c;
      labels.push_back(lab);
    }
    int nd = g.add_decision(turn, key, labels);
    if (parent >= 0) g.link(parent, via, nd);
    for (const auto& [lab, c] : cells) {
      Side me2 = me, opp2 = opp;
      me2.shots |= CellMask(1) << bit(c.x, c.y, prm.width);
      std::string outcome = "miss";
      for (size_t i = 0; i < opp2.placed.size(); ++i) {
        CellMask ship = options[i][opp2.placed[i]].mask;
        CellMask cm = CellMask(1) << bit(c.x, c.y, prm.width);
        if (ship & cm) {
          bool was_sunk = (opp2.hits[i] == ship);
          opp2.hits[i] |= cm;
          // A repeat shot into a destroyed ship stays a plain hit.
          outcome = (!was_sunk && opp2.hits[i] == ship) ? "sunk" : "hit";
          break;
        }
      }
      std::string hist2 = hist + lab + ":" + outcome + ";";
      Side& n1 = (turn == kP1) ? me2 : opp2;
      Side& n2 = (turn == kP1) ? opp2 : me2;
      if (opp2.fleet_destroyed(options)) {
        finish(nd, lab, n1, n2, hist2);
      } else {
        shoot(nd, lab, n1, n2, turn == kP1 ? kP2 : kP1,
              turn == kP1 ? fired_by_p1 + 1 : fired_by_p1, hist2);
      }
    }
  }

  void finish(int parent, const std::string& via, const Side& s1, const Side& s2,
              const std::string&) {
    double u1 = 0, u2 = 0;
    bool any_sunk = false;
    bool p1_dead = s1.fleet_destroyed(options);
    bool p2_dead = s2.fleet_destroyed(options);
    for (size_t i = 0; i < prm.ships.size(); ++i) {
      if (s2.hits[i] == options[i][s2.placed[i]].mask) {
        u1 += prm.ships[i].value;
        u2 -= prm.gamma * prm.ships[i].value;
        any_sunk = true;
      }
      if (s1.hits[i] == options[i][s1.placed[i]].mask) {
        u2 += prm.ships[i].value;
        u1 -= prm.gamma * prm.ships[i].value;
        any_sunk = true;
      }
    }
    std::string label = p2_dead   ? "p1_sinks"
                        : p1_dead ? "p2_sinks"
                        : any_sunk ? "timeout"
                                   : "peace";
    int z = g.add_terminal(u1, u2, label);
    if (parent >= 0) g.link(parent, via, z);
  }
};

}  // namespace

GameTree gen_battleship(const BattleshipParams& params) {
  if (params.height < 1 || params.width < 1)
    throw Unsatisfiable("grid dimensions must be positive");
  if (params.height * params.width > 64)
    throw TooLarge("grids beyond 64 cells are not supported");
  if (params.ships.empty()) throw Unsatisfiable("ship list is empty");
  int total_len = 0;
  for (const Ship& s : params.ships) {
    if (s.length < 1) throw Unsatisfiable("ship length must be positive");
    if (s.length > std::max(params.height, params.width))
      throw Unsatisfiable("ship of length " + std::to_string(s.length) + " fits no orientation");
    total_len += s.length;
  }
  if (total_len > params.height * params.width)
    throw Unsatisfiable("fleet does not fit the grid");
  if (params.rounds < 1) throw Unsatisfiable("rounds must be >= 1");
  if (params.gamma < 1.0) throw Unsatisfiable("gamma must be >= 1");
  if (!params.allow_repeat_shots && params.rounds > params.height * params.width)
    throw Unsatisfiable(
        "rounds exceed the cell count; shots would run out "
        "(pass allow_repeat_shots to lift the no-repeat rule)");

  GameTree g;
  BattleshipBuilder b{params, g, {}, params.height * params.width, params.max_nodes};
  for (const Ship& s : params.ships)
    b.options.push_back(placements_of(params.height, params.width, s.length));
  b.place(-1, "", 0, {}, {});
  g.finalize();
  return g;
}

GameTree gen_sheriff(const SheriffParams& params) {
  if (params.n_max < 0 || params.b_max < 0) throw Unsatisfiable("n_max and b_max must be >= 0");
  if (params.rounds < 1) throw Unsatisfiable("rounds must be >= 1");

  GameTree g;
  auto check_budget = [&] {
    if (g.num_nodes() > params.max_nodes)
      throw TooLarge("sheriff tree exceeds max_nodes = " + std::to_string(params.max_nodes));
  };

  std::vector<std::string> load_labels, bribe_labels;
  for (int n = 0; n <= params.n_max; ++n) load_labels.push_back(std::to_string(n));
  for (int b = 0; b <= params.b_max; ++b) bribe_labels.push_back(std::to_string(b));
  const std::vector<std::string> resp_labels{"yes", "no"};

  int root = g.add_decision(kP1, "load", load_labels);

  // One bargaining round: the Smuggler knows n and the public history, the
  // Sheriff sees the public history only.
  auto build = [&](auto&& self, int parent, const std::string& via, int n,
                   const std::string& hist, int t) -> void {
    check_budget();
    int bn = g.add_decision(kP1, "bribe|n" + std::to_string(n) + "|" + hist, bribe_labels);
    g.link(parent, via, bn);
    for (int b = 0; b <= params.b_max; ++b) {
      std::string hist_b = hist + "b" + std::to_string(b) + ";";
      int rn = g.add_decision(kP2, "resp|" + hist_b, resp_labels);
      g.link(bn, bribe_labels[b], rn);
      for (const std::string& resp : resp_labels) {
        if (t == params.rounds) {
          double u1, u2;
          std::string label;
          if (resp == "yes") {
            u1 = n * params.v - b;
            u2 = b;
            label = "accept_n" + std::to_string(n) + "_b" + std::to_string(b);
          } else if (n > 0) {
            u1 = -n * params.p;
            u2 = n * params.p;
            label = "caught_n" + std::to_string(n);
          } else {
            u1 = params.s;
            u2 = -params.s;
            label = "false_alarm";
          }
          g.link(rn, resp, g.add_terminal(u1, u2, label));
        } else {
          self(self, rn, resp, n, hist_b + resp + ";", t + 1);
        }
      }
    }
  };
  for (int n = 0; n <= params.n_max; ++n) build(build, root, load_labels[n], n, "", 1);
  g.finalize();
  return g;
}

std::vector<Ship> parse_ships(const std::string& text) {
  std::vector<Ship> ships;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto xpos = item.find('x');
    if (xpos == std::string::npos || xpos == 0 || xpos + 1 == item.size())
      throw ParseError("ship spec '" + item + "' is not LxV");
    try {
      ships.push_back({std::stoi(item.substr(0, xpos)), std::stod(item.substr(xpos + 1))});
    } catch (const std::exception&) {
      throw ParseError("ship spec '" + item + "' is not LxV");
    }
  }
  if (ships.empty()) throw ParseError("empty ship list");
  return ships;
}

}  // namespace efce
