#include "efce/lp_export.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "efce/errors.hpp"

namespace efce {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string signed_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%+.17g", v);
  return buf;
}

void sort_coalesce(std::vector<std::pair<int, double>>& terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  size_t out = 0;
  for (size_t i = 0; i < terms.size();) {
    int var = terms[i].first;
    double sum = 0.0;
    while (i < terms.size() && terms[i].first == var) sum += terms[i++].second;
    if (sum != 0.0) terms[out++] = {var, sum};
  }
  terms.resize(out);
}

const char* formulation_tag(LPFormulation f) {
  switch (f) {
    case LPFormulation::MinDeviation: return "efce_min_dev";
    case LPFormulation::FeasDeviation: return "efce_feas_dev";
    default: return "efce_max_sw";
  }
}

}  // namespace

LPModel build_lp(const GameTree& game, const RelevantPairs& pairs, const TriggerIndex& index,
                 LPFormulation formulation) {
  LPModel model;
  model.name = formulation_tag(formulation);
  model.maximize = formulation == LPFormulation::MaximumSW;
  model.n_xi = pairs.size();

  for (int pid = 0; pid < pairs.size(); ++pid) {
    model.vars.push_back({"xi_" + std::to_string(pid), false});
  }
  std::vector<int> nu_off(index.triggers.size());
  for (size_t t = 0; t < index.triggers.size(); ++t) {
    const TriggerInfo& trig = index.triggers[t];
    nu_off[t] = static_cast<int>(model.vars.size());
    std::string stem =
        "nu_p" + std::to_string(trig.player) + "_s" + std::to_string(trig.trigger_sid) + "_i";
    for (int iid : trig.subforest) model.vars.push_back({stem + std::to_string(iid), true});
  }
  int u_var = -1;
  if (formulation == LPFormulation::MinDeviation) {
    u_var = static_cast<int>(model.vars.size());
    model.vars.push_back({"u_dev", true});
  }

  LPModel::Constraint norm;
  norm.name = "norm";
  norm.sense = 'E';
  norm.rhs = 1.0;
  norm.terms.push_back({pairs.id(0, 0), 1.0});
  model.cons.push_back(std::move(norm));

  for (int s2 = 0; s2 < game.num_sequences(kP2); ++s2) {
    for (int iid : game.infosets_of(kP1)) {
      if (!pairs.relevant_col(iid, s2)) continue;
      LPModel::Constraint c;
      c.name = "c1_s" + std::to_string(s2) + "_i" + std::to_string(iid);
      c.sense = 'E';
      int na = static_cast<int>(game.infoset(iid).actions.size());
      for (int a = 0; a < na; ++a) {
        c.terms.push_back({pairs.id(game.sequence_id(kP1, iid, a), s2), 1.0});
      }
      c.terms.push_back({pairs.id(game.parent_sequence(iid), s2), -1.0});
      sort_coalesce(c.terms);
      model.cons.push_back(std::move(c));
    }
  }
  for (int s1 = 0; s1 < game.num_sequences(kP1); ++s1) {
    for (int iid : game.infosets_of(kP2)) {
      if (!pairs.relevant_row(s1, iid)) continue;
      LPModel::Constraint c;
      c.name = "c2_s" + std::to_string(s1) + "_i" + std::to_string(iid);
      c.sense = 'E';
      int na = static_cast<int>(game.infoset(iid).actions.size());
      for (int a = 0; a < na; ++a) {
        c.terms.push_back({pairs.id(s1, game.sequence_id(kP2, iid, a)), 1.0});
      }
      c.terms.push_back({pairs.id(s1, game.parent_sequence(iid)), -1.0});
      sort_coalesce(c.terms);
      model.cons.push_back(std::move(c));
    }
  }

  for (size_t t = 0; t < index.triggers.size(); ++t) {
    const TriggerInfo& trig = index.triggers[t];
    std::string stem = "_p" + std::to_string(trig.player) + "_s" + std::to_string(trig.trigger_sid);
    for (size_t j = 0; j < trig.subforest.size(); ++j) {
      for (const TriggerInfo::SeqEntry& entry : trig.actions[j]) {
        LPModel::Constraint c;
        c.name = "tr" + stem + "_q" + std::to_string(entry.seq);
        c.sense = 'L';
        for (const auto& [pid, u] : entry.weights) c.terms.push_back({pid, u});
        c.terms.push_back({nu_off[t] + static_cast<int>(j), -1.0});
        for (int ch : entry.child_local) c.terms.push_back({nu_off[t] + ch, 1.0});
        sort_coalesce(c.terms);
        model.cons.push_back(std::move(c));
      }
    }
    LPModel::Constraint cap;
    cap.name = "cap" + stem;
    cap.sense = 'L';
    cap.terms.push_back({nu_off[t], 1.0});
    for (const auto& [pid, u] : trig.follow_terms) cap.terms.push_back({pid, -u});
    if (u_var >= 0) cap.terms.push_back({u_var, -1.0});
    sort_coalesce(cap.terms);
    model.cons.push_back(std::move(cap));
  }

  if (formulation == LPFormulation::MinDeviation) {
    model.objective.push_back({u_var, 1.0});
  } else if (formulation == LPFormulation::MaximumSW) {
    std::map<int, double> obj;
    for (int z : game.terminals()) {
      const Node& node = game.node(z);
      int pid = pairs.id(game.last_sequence(kP1, z), game.last_sequence(kP2, z));
      obj[pid] += node.payoffs[0] + node.payoffs[1];
    }
    for (const auto& [pid, coeff] : obj) {
      if (coeff != 0.0) model.objective.push_back({pid, coeff});
    }
  }
  return model;
}

LPModel build_lp(const GameTree& game, LPFormulation formulation) {
  RelevantPairs pairs = RelevantPairs::build(game);
  TriggerIndex index = build_trigger_index(game, pairs);
  return build_lp(game, pairs, index, formulation);
}

namespace {

void write_terms(std::ostream& os, const LPModel& model,
                 const std::vector<std::pair<int, double>>& terms) {
  int on_line = 0;
  for (const auto& [var, coeff] : terms) {
    if (on_line == 8) {
      os << "\n   ";
      on_line = 0;
    }
    os << ' ' << signed_num(coeff) << ' ' << model.vars[var].name;
    ++on_line;
  }
}

void write_lp_text(const LPModel& model, std::ostream& os) {
  os << "\\ " << model.name << "\n";
  os << (model.maximize ? "Maximize" : "Minimize") << "\n";
  os << " obj:";
  write_terms(os, model, model.objective);
  os << "\nSubject To\n";
  for (const auto& c : model.cons) {
    os << ' ' << c.name << ':';
    write_terms(os, model, c.terms);
    os << ' ' << (c.sense == 'E' ? "=" : "<=") << ' ' << num(c.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : model.vars) {
    if (v.free_sign) {
      os << ' ' << v.name << " free\n";
    } else {
      os << ' ' << v.name << " >= 0\n";
    }
  }
  os << "End\n";
}

void write_mps(const LPModel& model, std::ostream& os) {
  os << "NAME " << model.name << "\n";
  os << "OBJSENSE\n    " << (model.maximize ? "MAX" : "MIN") << "\n";
  os << "ROWS\n N obj\n";
  for (const auto& c : model.cons) {
    os << ' ' << c.sense << ' ' << c.name << "\n";
  }
  std::vector<std::vector<std::pair<std::string, double>>> columns(model.vars.size());
  for (const auto& [var, coeff] : model.objective) columns[var].push_back({"obj", coeff});
  for (const auto& c : model.cons) {
    for (const auto& [var, coeff] : c.terms) columns[var].push_back({c.name, coeff});
  }
  os << "COLUMNS\n";
  for (size_t v = 0; v < columns.size(); ++v) {
    for (const auto& [row, coeff] : columns[v]) {
      os << "    " << model.vars[v].name << ' ' << row << ' ' << num(coeff) << "\n";
    }
  }
  os << "RHS\n";
  for (const auto& c : model.cons) {
    if (c.rhs != 0.0) os << "    rhs " << c.name << ' ' << num(c.rhs) << "\n";
  }
  os << "BOUNDS\n";
  for (const auto& v : model.vars) {
    if (v.free_sign) os << " FR bnd " << v.name << "\n";
  }
  os << "ENDATA\n";
}

}  // namespace

void write_lp(const LPModel& model, std::ostream& os, LPFileFormat format) {
  if (format == LPFileFormat::LPText) {
    write_lp_text(model, os);
  } else {
    write_mps(model, os);
  }
}

void write_lp_file(const LPModel& model, const std::string& path, LPFileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_lp(model, out, format);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

bool is_number_token(const std::string& tok) {
  if (tok.empty()) return false;
  char c = tok[0];
  return (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
}

double to_number(const std::string& tok) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ParseError("bad number in LP file: " + tok);
  return v;
}

int count_xi(const LPModel& model) {
  int n = 0;
  for (const auto& v : model.vars) {
    if (v.name.rfind("xi_", 0) == 0) ++n;
  }
  return n;
}

}  // namespace

LPModel parse_lp_text(const std::string& text) {
  LPModel model;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> obj_tokens, con_tokens;
  enum { kHead, kObj, kCons, kBounds, kDone } state = kHead;
  std::map<std::string, int> var_ids;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '\\') {
      if (model.name.empty() && line.size() > 2) model.name = line.substr(2);
      continue;
    }
    if (line == "Maximize" || line == "Minimize") {
      model.maximize = line == "Maximize";
      state = kObj;
      continue;
    }
    if (line == "Subject To") {
      state = kCons;
      continue;
    }
    if (line == "Bounds") {
      state = kBounds;
      continue;
    }
    if (line == "End") {
      state = kDone;
      break;
    }
    std::istringstream ls(line);
    std::string tok;
    if (state == kObj) {
      while (ls >> tok) {
        if (tok != "obj:") obj_tokens.push_back(tok);
      }
    } else if (state == kCons) {
      while (ls >> tok) con_tokens.push_back(tok);
    } else if (state == kBounds) {
      std::string name, op, rest;
      ls >> name >> op;
      if (name.empty()) continue;
      LPModel::Var v;
      v.name = name;
      if (op == "free") {
        v.free_sign = true;
      } else if (op == ">=" && (ls >> rest) && rest == "0") {
        v.free_sign = false;
      } else {
        throw ParseError("bad bounds line: " + line);
      }
      var_ids[name] = static_cast<int>(model.vars.size());
      model.vars.push_back(std::move(v));
    }
  }
  if (state != kDone) throw ParseError("LP file missing End marker");

  auto var_of = [&](const std::string& name) {
    auto it = var_ids.find(name);
    if (it == var_ids.end()) throw ParseError("LP file references unknown variable " + name);
    return it->second;
  };
  if (obj_tokens.size() % 2 != 0) throw ParseError("objective has a dangling token");
  for (size_t i = 0; i + 1 < obj_tokens.size(); i += 2) {
    model.objective.push_back({var_of(obj_tokens[i + 1]), to_number(obj_tokens[i])});
  }
  size_t i = 0;
  while (i < con_tokens.size()) {
    std::string name = con_tokens[i++];
    if (name.empty() || name.back() != ':') throw ParseError("expected constraint name, got " + name);
    LPModel::Constraint c;
    c.name = name.substr(0, name.size() - 1);
    while (i < con_tokens.size() && is_number_token(con_tokens[i])) {
      if (i + 1 >= con_tokens.size()) throw ParseError("dangling coefficient in " + c.name);
      c.terms.push_back({var_of(con_tokens[i + 1]), to_number(con_tokens[i])});
      i += 2;
    }
    if (i >= con_tokens.size()) throw ParseError("constraint " + c.name + " missing relation");
    std::string rel = con_tokens[i++];
    if (rel == "=") {
      c.sense = 'E';
    } else if (rel == "<=") {
      c.sense = 'L';
    } else {
      throw ParseError("unsupported relation " + rel + " in " + c.name);
    }
    if (i >= con_tokens.size()) throw ParseError("constraint " + c.name + " missing rhs");
    c.rhs = to_number(con_tokens[i++]);
    model.cons.push_back(std::move(c));
  }
  model.n_xi = count_xi(model);
  return model;
}

LPModel parse_mps(const std::string& text) {
  LPModel model;
  std::istringstream in(text);
  std::string line, section;
  std::map<std::string, int> row_ids, var_ids;
  bool saw_end = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (!line.empty() && line[0] != ' ') {
      if (first == "NAME") {
        ls >> model.name;
        section = "NAME";
      } else if (first == "ENDATA") {
        saw_end = true;
        break;
      } else {
        section = first;
      }
      continue;
    }
    if (section == "OBJSENSE") {
      model.maximize = first == "MAX";
    } else if (section == "ROWS") {
      std::string name;
      ls >> name;
      if (first == "N") continue;
      if (first != "E" && first != "L") throw ParseError("unsupported row sense " + first);
      LPModel::Constraint c;
      c.name = name;
      c.sense = first[0];
      row_ids[name] = static_cast<int>(model.cons.size());
      model.cons.push_back(std::move(c));
    } else if (section == "COLUMNS") {
      std::string row, val;
      if (!(ls >> row >> val)) throw ParseError("bad COLUMNS line: " + line);
      auto it = var_ids.find(first);
      int var;
      if (it == var_ids.end()) {
        var = static_cast<int>(model.vars.size());
        var_ids[first] = var;
        model.vars.push_back({first, false});
      } else {
        var = it->second;
      }
      if (row == "obj") {
        model.objective.push_back({var, to_number(val)});
      } else {
        auto rit = row_ids.find(row);
        if (rit == row_ids.end()) throw ParseError("unknown row " + row);
        model.cons[rit->second].terms.push_back({var, to_number(val)});
      }
    } else if (section == "RHS") {
      std::string row, val;
      if (!(ls >> row >> val)) throw ParseError("bad RHS line: " + line);
      auto rit = row_ids.find(row);
      if (rit == row_ids.end()) throw ParseError("unknown row " + row);
      model.cons[rit->second].rhs = to_number(val);
    } else if (section == "BOUNDS") {
      std::string bnd, name;
      if (first != "FR" || !(ls >> bnd >> name)) throw ParseError("bad BOUNDS line: " + line);
      auto it = var_ids.find(name);
      if (it == var_ids.end()) throw ParseError("bound on unknown variable " + name);
      model.vars[it->second].free_sign = true;
    }
  }
  if (!saw_end) throw ParseError("MPS file missing ENDATA");
  for (auto& c : model.cons) sort_coalesce(c.terms);
  model.n_xi = count_xi(model);
  return model;
}

}  // namespace efce
