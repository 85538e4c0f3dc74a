#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "efce/errors.hpp"

namespace efce {

using PlayerId = int;
inline constexpr PlayerId kP1 = 0;
inline constexpr PlayerId kP2 = 1;

struct Node {
  bool terminal = false;
  PlayerId owner = -1;  // decision nodes only
  int infoset = -1;     // decision nodes only
  std::vector<std::pair<std::string, int>> children;  // ordered (action, child id)
  std::array<double, 2> payoffs{0.0, 0.0};            // terminal nodes only
  std::string label;                                  // optional terminal tag
};

struct Infoset {
  PlayerId owner = -1;
  std::vector<int> nodes;
  std::vector<std::string> actions;
};

// A player's sequence: the empty sequence (id 0) or an (infoset, action) pair.
// Sequences are referred to by dense ids, assigned root-first per player.
struct SequenceKey {
  int infoset = -1;
  int action = -1;  // index into the infoset's action list
  bool empty() const { return infoset < 0; }
};

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has(const std::string& code) const;
  std::string to_string() const;
};

// Trigger sequence sigma_hat = (I_hat, a_hat) splits the terminals into the
// descendants through a_hat at I_hat, the descendants of I_hat through other
// actions, and everything else.
struct TerminalPartition {
  PlayerId player = -1;
  int trigger = -1;  // sequence id in the owner's numbering
  std::vector<int> trig;     // Z through (I_hat, a_hat)
  std::vector<int> info;     // Z through I_hat, other actions
  std::vector<int> outside;  // Z whose path misses I_hat
};

// Two-player, chance-free extensive-form game with perfect recall.
// Build with add_decision/add_terminal/link (or parse from JSON), then call
// finalize(); all derived accessors require a finalized tree, and a finalized
// tree is immutable.
class GameTree {
 public:
  // Adds a decision node. Nodes naming the same infoset key share an infoset;
  // the action list is recorded on first use. Action availability at the node
  // itself is determined by link() calls and checked by validate().
  int add_decision(PlayerId owner, const std::string& infoset_key,
                   const std::vector<std::string>& actions);
  int add_terminal(double u1, double u2, std::string label = "");
  void link(int parent, const std::string& action, int child);

  ValidationReport validate() const;
  // Derives sequence/infoset structure; throws ValidationError if invalid.
  void finalize();
  bool finalized() const { return finalized_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_infosets() const { return static_cast<int>(infosets_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  const Infoset& infoset(int id) const { return infosets_[id]; }

  // --- derived structure (finalized trees only) ---

  // Sequence count including the empty sequence (id 0).
  int num_sequences(PlayerId p) const { return static_cast<int>(seqs_[p].size()); }
  const SequenceKey& sequence(PlayerId p, int sid) const { return seqs_[p][sid]; }
  // Dense id of (infoset, action index); throws UnknownSequence if absent.
  int sequence_id(PlayerId p, int infoset, int action) const;
  // The owner's sequence leading into the infoset (0 = empty).
  int parent_sequence(int infoset) const { return infoset_parent_seq_[infoset]; }
  // Infosets of one player, topologically ordered (parents first).
  const std::vector<int>& infosets_of(PlayerId p) const { return pl_infosets_[p]; }
  // Infosets whose parent sequence is sid (owner's numbering).
  const std::vector<int>& children_infosets(PlayerId p, int sid) const {
    return seq_children_[p][sid];
  }
  // Terminals z with sigma_p(z) = sid.
  const std::vector<int>& terminals_under(PlayerId p, int sid) const {
    return seq_terminals_[p][sid];
  }
  const std::vector<int>& terminals() const { return terminals_; }
  // sigma_p at a node: the player's last sequence on the root path.
  int last_sequence(PlayerId p, int node) const { return node_last_seq_[p][node]; }
  int parent_node(int node) const { return parent_[node]; }
  // Nodes in topological (root-first) order.
  const std::vector<int>& topo_order() const { return topo_; }

  TerminalPartition terminal_partition(PlayerId p, int trigger_sid) const;

  // --- serialization (schema documented in README) ---
  std::string to_json() const;
  static GameTree from_json(const std::string& text);
  static GameTree from_json_file(const std::string& path);

 private:
  void require_finalized() const;
  void require_mutable() const;

  std::vector<Node> nodes_;
  std::vector<Infoset> infosets_;
  std::unordered_map<std::string, int> infoset_by_key_;
  bool finalized_ = false;

  // derived
  std::vector<int> parent_;
  std::vector<int> topo_;
  std::vector<int> terminals_;
  std::array<std::vector<SequenceKey>, 2> seqs_;
  std::array<std::unordered_map<int64_t, int>, 2> seq_by_pair_;
  std::vector<int> infoset_parent_seq_;
  std::array<std::vector<int>, 2> node_last_seq_;
  std::array<std::vector<int>, 2> pl_infosets_;
  std::array<std::vector<std::vector<int>>, 2> seq_children_;
  std::array<std::vector<std::vector<int>>, 2> seq_terminals_;
};

// Ordered sequence list of one player: the empty sequence first, then one
// entry per (infoset, action), parents before children.
std::vector<SequenceKey> sequences(const GameTree& game, PlayerId p);

}  // namespace efce
