#include "efce/game_tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace efce {

namespace {

int64_t pair_key(int infoset, int action) {
  return (static_cast<int64_t>(infoset) << 32) | static_cast<uint32_t>(action);
}

}  // namespace

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& i : issues) os << i.code << ": " << i.message << "\n";
  return os.str();
}

int GameTree::add_decision(PlayerId owner, const std::string& infoset_key,
                           const std::vector<std::string>& actions) {
  require_mutable();
  int iid;
  auto it = infoset_by_key_.find(infoset_key);
  if (it == infoset_by_key_.end()) {
    iid = static_cast<int>(infosets_.size());
    infoset_by_key_.emplace(infoset_key, iid);
    infosets_.push_back(Infoset{owner, {}, actions});
  } else {
    iid = it->second;
  }
  int nid = static_cast<int>(nodes_.size());
  infosets_[iid].nodes.push_back(nid);
  Node n;
  n.owner = owner;
  n.infoset = iid;
  nodes_.push_back(std::move(n));
  return nid;
}

int GameTree::add_terminal(double u1, double u2, std::string label) {
  require_mutable();
  int nid = static_cast<int>(nodes_.size());
  Node n;
  n.terminal = true;
  n.payoffs = {u1, u2};
  n.label = std::move(label);
  nodes_.push_back(std::move(n));
  return nid;
}

void GameTree::link(int parent, const std::string& action, int child) {
  require_mutable();
  nodes_[parent].children.emplace_back(action, child);
}

void GameTree::require_mutable() const {
  if (finalized_) throw ValidationError("game is immutable after finalize()");
}

void GameTree::require_finalized() const {
  if (!finalized_) throw ValidationError("game not finalized");
}

ValidationReport GameTree::validate() const {
  ValidationReport rep;
  auto issue = [&](const std::string& code, const std::string& msg) {
    rep.issues.push_back({code, msg});
  };
  if (nodes_.empty()) {
    issue("EmptyTree", "game has no nodes");
    return rep;
  }

  const int n = num_nodes();
  for (int id = 0; id < n; ++id) {
    const Node& nd = nodes_[id];
    if (nd.terminal) {
      if (!nd.children.empty())
        issue("TerminalWithChildren", "terminal node " + std::to_string(id) + " has children");
      continue;
    }
    if (nd.owner != kP1 && nd.owner != kP2)
      issue("BadOwner", "node " + std::to_string(id) + " owner " + std::to_string(nd.owner));
    if (nd.infoset < 0 || nd.infoset >= num_infosets()) {
      issue("BadInfoset", "node " + std::to_string(id) + " references infoset " +
                              std::to_string(nd.infoset));
      continue;
    }
    const Infoset& is = infosets_[nd.infoset];
    if (is.owner != nd.owner)
      issue("OwnerMismatch", "node " + std::to_string(id) + " owner differs from infoset " +
                                 std::to_string(nd.infoset));
    if (nd.children.empty())
      issue("NoActions", "decision node " + std::to_string(id) + " has no actions");
    std::vector<std::string> labels;
    labels.reserve(nd.children.size());
    for (const auto& [lab, ch] : nd.children) {
      labels.push_back(lab);
      if (ch < 0 || ch >= n)
        issue("BadChild", "node " + std::to_string(id) + " links to node " + std::to_string(ch));
    }
    if (labels != is.actions)
      issue("InconsistentActions",
            "node " + std::to_string(id) + " action labels differ from infoset " +
                std::to_string(nd.infoset));
  }

  for (int iid = 0; iid < num_infosets(); ++iid) {
    const Infoset& is = infosets_[iid];
    if (is.nodes.empty())
      issue("EmptyInfoset", "infoset " + std::to_string(iid) + " has no member nodes");
    if (is.actions.empty())
      issue("NoActions", "infoset " + std::to_string(iid) + " has no actions");
    for (int nid : is.nodes) {
      if (nid < 0 || nid >= n || nodes_[nid].terminal || nodes_[nid].infoset != iid)
        issue("InfosetMembership", "infoset " + std::to_string(iid) + " lists node " +
                                       std::to_string(nid) + " which does not point back");
    }
  }
  if (!rep.ok()) return rep;  // structural damage; skip path analysis

  // Reachability from the root (node 0) and tree-ness.
  std::vector<int> parent(n, -2);
  parent[0] = -1;
  std::vector<int> order{0};
  order.reserve(n);
  for (size_t qi = 0; qi < order.size(); ++qi) {
    int id = order[qi];
    for (const auto& [lab, ch] : nodes_[id].children) {
      (void)lab;
      if (parent[ch] != -2) {
        issue("MultipleParents", "node " + std::to_string(ch) + " is linked more than once");
        continue;
      }
      parent[ch] = id;
      order.push_back(ch);
    }
  }
  for (int id = 0; id < n; ++id)
    if (parent[id] == -2)
      issue("OrphanNode", "node " + std::to_string(id) + " unreachable from the root");
  if (!rep.ok()) return rep;

  // Perfect recall: all nodes of an infoset see the same own (infoset, action)
  // history on their root paths.
  for (PlayerId pl : {kP1, kP2}) {
    std::vector<std::vector<std::pair<int, int>>> hist(n);
    for (int id : order) {
      if (parent[id] >= 0) {
        int p = parent[id];
        hist[id] = hist[p];
        const Node& pn = nodes_[p];
        if (!pn.terminal && pn.owner == pl) {
          int ai = -1;
          for (size_t k = 0; k < pn.children.size(); ++k)
            if (pn.children[k].second == id) ai = static_cast<int>(k);
          hist[id].emplace_back(pn.infoset, ai);
        }
      }
    }
    for (int iid = 0; iid < num_infosets(); ++iid) {
      const Infoset& is = infosets_[iid];
      if (is.owner != pl || is.nodes.size() < 2) continue;
      const auto& ref = hist[is.nodes[0]];
      for (size_t k = 1; k < is.nodes.size(); ++k) {
        if (hist[is.nodes[k]] != ref) {
          issue("PerfectRecallViolation",
                "infoset " + std::to_string(iid) + ": nodes " + std::to_string(is.nodes[0]) +
                    " and " + std::to_string(is.nodes[k]) + " have different own histories");
          break;
        }
      }
    }
  }
  return rep;
}

void GameTree::finalize() {
  if (finalized_) return;
  ValidationReport rep = validate();
  if (!rep.ok()) throw ValidationError("invalid game:\n" + rep.to_string());

  const int n = num_nodes();
  parent_.assign(n, -1);
  topo_.clear();
  topo_.push_back(0);
  std::vector<int> in_action(n, -1);  // action index taken at the parent
  for (size_t qi = 0; qi < topo_.size(); ++qi) {
    int id = topo_[qi];
    const Node& nd = nodes_[id];
    for (size_t k = 0; k < nd.children.size(); ++k) {
      int ch = nd.children[k].second;
      parent_[ch] = id;
      in_action[ch] = static_cast<int>(k);
      topo_.push_back(ch);
    }
  }

  for (PlayerId pl : {kP1, kP2}) {
    seqs_[pl].clear();
    seqs_[pl].push_back(SequenceKey{});  // empty sequence, id 0
    seq_by_pair_[pl].clear();
    node_last_seq_[pl].assign(n, 0);
    pl_infosets_[pl].clear();
  }
  infoset_parent_seq_.assign(num_infosets(), -1);
  terminals_.clear();

  std::vector<bool> infoset_seen(num_infosets(), false);
  for (int id : topo_) {
    const Node& nd = nodes_[id];
    if (parent_[id] >= 0) {
      const Node& pn = nodes_[parent_[id]];
      for (PlayerId pl : {kP1, kP2})
        node_last_seq_[pl][id] = node_last_seq_[pl][parent_[id]];
      PlayerId ow = pn.owner;
      int64_t key = pair_key(pn.infoset, in_action[id]);
      auto it = seq_by_pair_[ow].find(key);
      int sid;
      if (it == seq_by_pair_[ow].end()) {
        sid = static_cast<int>(seqs_[ow].size());
        seq_by_pair_[ow].emplace(key, sid);
        seqs_[ow].push_back(SequenceKey{pn.infoset, in_action[id]});
      } else {
        sid = it->second;
      }
      node_last_seq_[ow][id] = sid;
    }
    if (nd.terminal) {
      terminals_.push_back(id);
      continue;
    }
    int iid = nd.infoset;
    int ps = node_last_seq_[nd.owner][id];
    if (!infoset_seen[iid]) {
      infoset_seen[iid] = true;
      infoset_parent_seq_[iid] = ps;
      pl_infosets_[nd.owner].push_back(iid);
    } else if (infoset_parent_seq_[iid] != ps) {
      throw ValidationError("perfect recall violation at infoset " + std::to_string(iid));
    }
  }

  for (PlayerId pl : {kP1, kP2}) {
    seq_children_[pl].assign(seqs_[pl].size(), {});
    seq_terminals_[pl].assign(seqs_[pl].size(), {});
  }
  for (PlayerId pl : {kP1, kP2})
    for (int iid : pl_infosets_[pl])
      seq_children_[pl][infoset_parent_seq_[iid]].push_back(iid);
  for (int z : terminals_)
    for (PlayerId pl : {kP1, kP2})
      seq_terminals_[pl][node_last_seq_[pl][z]].push_back(z);

  finalized_ = true;
}

int GameTree::sequence_id(PlayerId p, int infoset, int action) const {
  require_finalized();
  auto it = seq_by_pair_[p].find(pair_key(infoset, action));
  if (it == seq_by_pair_[p].end())
    throw UnknownSequence("no sequence for player " + std::to_string(p) + " infoset " +
                          std::to_string(infoset) + " action " + std::to_string(action));
  return it->second;
}

TerminalPartition GameTree::terminal_partition(PlayerId p, int trigger_sid) const {
  require_finalized();
  if (trigger_sid <= 0 || trigger_sid >= num_sequences(p))
    throw UnknownSequence("trigger sequence " + std::to_string(trigger_sid) +
                          " out of range for player " + std::to_string(p));
  const SequenceKey& sk = seqs_[p][trigger_sid];
  TerminalPartition part;
  part.player = p;
  part.trigger = trigger_sid;

  // Mark descendants of the trigger infoset's nodes, split by the action taken.
  std::vector<int8_t> mark(num_nodes(), 0);  // 1 = through a_hat, 2 = other action
  std::vector<int> stack;
  for (int nid : infosets_[sk.infoset].nodes) {
    const Node& nd = nodes_[nid];
    for (size_t k = 0; k < nd.children.size(); ++k) {
      int8_t m = (static_cast<int>(k) == sk.action) ? 1 : 2;
      mark[nd.children[k].second] = m;
      stack.push_back(nd.children[k].second);
    }
  }
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    for (const auto& [lab, ch] : nodes_[id].children) {
      (void)lab;
      mark[ch] = mark[id];
      stack.push_back(ch);
    }
  }
  for (int z : terminals_) {
    if (mark[z] == 1)
      part.trig.push_back(z);
    else if (mark[z] == 2)
      part.info.push_back(z);
    else
      part.outside.push_back(z);
  }
  return part;
}

std::vector<SequenceKey> sequences(const GameTree& game, PlayerId p) {
  std::vector<SequenceKey> out;
  out.reserve(game.num_sequences(p));
  for (int s = 0; s < game.num_sequences(p); ++s) out.push_back(game.sequence(p, s));
  return out;
}

// --- JSON serialization ---

std::string GameTree::to_json() const {
  nlohmann::ordered_json j;
  j["players"] = {"P1", "P2"};
  auto& jn = j["nodes"] = nlohmann::ordered_json::array();
  for (int id = 0; id < num_nodes(); ++id) {
    const Node& nd = nodes_[id];
    nlohmann::ordered_json o;
    o["id"] = id;
    if (nd.terminal) {
      o["kind"] = "terminal";
      o["payoffs"] = {nd.payoffs[0], nd.payoffs[1]};
      if (!nd.label.empty()) o["label"] = nd.label;
    } else {
      o["kind"] = "decision";
      o["owner"] = nd.owner;
      o["infoset"] = nd.infoset;
      nlohmann::ordered_json ch = nlohmann::ordered_json::object();
      for (const auto& [lab, c] : nd.children) ch[lab] = c;
      o["children"] = std::move(ch);
    }
    jn.push_back(std::move(o));
  }
  auto& ji = j["infosets"] = nlohmann::ordered_json::array();
  for (int iid = 0; iid < num_infosets(); ++iid) {
    const Infoset& is = infosets_[iid];
    nlohmann::ordered_json o;
    o["id"] = iid;
    o["owner"] = is.owner;
    o["nodes"] = is.nodes;
    o["actions"] = is.actions;
    ji.push_back(std::move(o));
  }
  return j.dump(1);
}

GameTree GameTree::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad JSON: ") + e.what());
  }
  GameTree g;
  try {
    if (!j.contains("nodes") || !j.contains("infosets"))
      throw ParseError("missing 'nodes' or 'infosets'");

    const auto& ji = j.at("infosets");
    g.infosets_.resize(ji.size());
    for (const auto& o : ji) {
      int iid = o.at("id").get<int>();
      if (iid < 0 || iid >= static_cast<int>(ji.size()))
        throw ParseError("infoset id " + std::to_string(iid) + " out of range");
      Infoset& is = g.infosets_[iid];
      is.owner = o.at("owner").get<int>();
      is.nodes = o.at("nodes").get<std::vector<int>>();
      is.actions = o.at("actions").get<std::vector<std::string>>();
    }

    const auto& jn = j.at("nodes");
    g.nodes_.resize(jn.size());
    for (const auto& o : jn) {
      int id = o.at("id").get<int>();
      if (id < 0 || id >= static_cast<int>(jn.size()))
        throw ParseError("node id " + std::to_string(id) + " out of range");
      Node& nd = g.nodes_[id];
      std::string kind = o.at("kind").get<std::string>();
      if (kind == "terminal") {
        nd.terminal = true;
        auto pay = o.at("payoffs").get<std::vector<double>>();
        if (pay.size() != 2) throw ParseError("terminal payoffs must have 2 entries");
        nd.payoffs = {pay[0], pay[1]};
        if (o.contains("label")) nd.label = o.at("label").get<std::string>();
      } else if (kind == "decision") {
        nd.owner = o.at("owner").get<int>();
        nd.infoset = o.at("infoset").get<int>();
        const auto& ch = o.at("children");
        if (nd.infoset >= 0 && nd.infoset < static_cast<int>(g.infosets_.size())) {
          // Canonical child order follows the infoset's action list; stray
          // keys are appended so validate() can flag them.
          for (const std::string& a : g.infosets_[nd.infoset].actions)
            if (ch.contains(a)) nd.children.emplace_back(a, ch.at(a).get<int>());
          for (auto it = ch.begin(); it != ch.end(); ++it) {
            const auto& acts = g.infosets_[nd.infoset].actions;
            if (std::find(acts.begin(), acts.end(), it.key()) == acts.end())
              nd.children.emplace_back(it.key(), it.value().get<int>());
          }
        } else {
          for (auto it = ch.begin(); it != ch.end(); ++it)
            nd.children.emplace_back(it.key(), it.value().get<int>());
        }
      } else {
        throw ParseError("node kind '" + kind + "' unknown");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad game JSON: ") + e.what());
  }
  return g;
}

GameTree GameTree::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace efce
