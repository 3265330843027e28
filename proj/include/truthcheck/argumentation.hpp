/*
 * Copyright 2026 The truthcheck Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "truthcheck/errors.hpp"
#include "truthcheck/investigator.hpp"

// A fixed-schema classical-logic dialectic over a truth report.
//
// Atoms
//   a        the explanation is untrusted
//   b        the explanation is trusted
//   c_j      z_j is untruthful
//   d_j      z_j is truthful, with the evidence that makes it so
//   e_j,ALT  f_j's influence predicts how the probability moves under ALT
//   f_j,ALT  f_j was altered and the probability moved as observed
//
// Arguments <support, claim>
//   α1      <{a}, a>
//   α2      <{b, b -> ¬a}, ¬a>                               rebuts α1
//   α3      <{c_j.., (c_j ∧ ..) -> ¬b}, ¬b>                   undercuts α2
//   α4(j)   <{d_j, d_j -> ¬c_j}, ¬c_j>                        undercuts α3
//   α5(j)   <{e_j,inc, e_j,dec, (e_j,inc ∧ e_j,dec) -> ¬d_j}, ¬d_j>  undercuts α4(j)
//   α6(j,A) <{f_j,A, f_j,A -> ¬e_j,A}, ¬e_j,A>                undercuts α5(j)
//
// α3 bundles the challenged features: every untruthful feature when there is
// one, otherwise every tested feature. The two α6 of a feature are offered
// only as a pair, when both of its alterations behaved as expected. Under the
// mark rule the root is then defeated exactly when nothing is untruthful.

namespace truthcheck {

enum class AtomKind { kA, kB, kC, kD, kE, kF };

struct Atom {
  AtomKind kind = AtomKind::kA;
  std::optional<std::size_t> feature{};
  std::optional<Alt> alt{};

  std::string symbol() const {
    static constexpr const char* kNames[] = {"a", "b", "c", "d", "e", "f"};
    std::string s = kNames[static_cast<int>(kind)];
    if (feature) s += "_" + std::to_string(*feature + 1);
    if (alt) s += *alt == Alt::kIncreasing ? ",inc" : ",dec";
    return s;
  }

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Literal {
  Atom atom;
  bool negated = false;

  std::string str() const { return (negated ? "¬" : "") + atom.symbol(); }
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Implication {
  std::vector<Atom> antecedent{};
  Literal consequent;

  std::string str() const {
    std::string s;
    if (antecedent.size() > 1) s += "(";
    for (std::size_t i = 0; i < antecedent.size(); ++i) {
      if (i) s += " ∧ ";
      s += antecedent[i].symbol();
    }
    if (antecedent.size() > 1) s += ")";
    return s + " → " + consequent.str();
  }
  friend bool operator==(const Implication&, const Implication&) = default;
};

using Formula = std::variant<Atom, Implication>;

enum class ArgumentSchema { kAlpha1 = 1, kAlpha2, kAlpha3, kAlpha4, kAlpha5, kAlpha6 };

struct Argument {
  ArgumentSchema schema = ArgumentSchema::kAlpha1;
  std::optional<std::size_t> feature;  // α4, α5, α6
  std::optional<Alt> alt;              // α6
  std::vector<std::size_t> bundled;    // α3
  std::vector<Formula> support{};
  Literal claim;

  std::string id() const {
    std::string s = "α" + std::to_string(static_cast<int>(schema));
    if (feature) {
      s += "(" + std::to_string(*feature + 1);
      if (alt) s += *alt == Alt::kIncreasing ? ",inc" : ",dec";
      s += ")";
    }
    return s;
  }

  std::string str() const {
    std::string s = "⟨{";
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i) s += ", ";
      s += std::visit(
          [](const auto& f) -> std::string {
            if constexpr (std::is_same_v<std::decay_t<decltype(f)>, Atom>) {
              return f.symbol();
            } else {
              return f.str();
            }
          },
          support[i]);
    }
    return s + "}, " + claim.str() + "⟩";
  }

  friend bool operator==(const Argument&, const Argument&) = default;
};

inline Argument make_alpha1() {
  const Atom a{AtomKind::kA};
  return {ArgumentSchema::kAlpha1, {}, {}, {}, {a}, {a, false}};
}

inline Argument make_alpha2() {
  const Atom a{AtomKind::kA}, b{AtomKind::kB};
  return {ArgumentSchema::kAlpha2, {}, {}, {}, {b, Implication{{b}, {a, true}}}, {a, true}};
}

inline Argument make_alpha3(std::vector<std::size_t> challenged) {
  const Atom b{AtomKind::kB};
  Argument arg{ArgumentSchema::kAlpha3, {}, {}, challenged, {}, {b, true}};
  std::vector<Atom> cs{};
  for (std::size_t j : challenged) cs.push_back({AtomKind::kC, j});
  for (const auto& c : cs) arg.support.emplace_back(c);
  arg.support.emplace_back(Implication{cs, {b, true}});
  return arg;
}

inline Argument make_alpha4(std::size_t j) {
  const Atom c{AtomKind::kC, j}, d{AtomKind::kD, j};
  return {ArgumentSchema::kAlpha4, j, {}, {}, {d, Implication{{d}, {c, true}}}, {c, true}};
}

inline Argument make_alpha5(std::size_t j) {
  const Atom d{AtomKind::kD, j};
  const Atom inc{AtomKind::kE, j, Alt::kIncreasing}, dec{AtomKind::kE, j, Alt::kDecreasing};
  return {ArgumentSchema::kAlpha5, j, {}, {}, {inc, dec, Implication{{inc, dec}, {d, true}}}, {d, true}};
}

inline Argument make_alpha6(std::size_t j, Alt alt) {
  const Atom e{AtomKind::kE, j, alt}, f{AtomKind::kF, j, alt};
  return {ArgumentSchema::kAlpha6, j, alt, {}, {f, Implication{{f}, {e, true}}}, {e, true}};
}

enum class AttackKind { kRebuttal, kUndercut };
enum class Mark { kUndefeated, kDefeated };
enum class Judgement { kWarranted, kUnwarranted };

inline const char* to_string(AttackKind k) { return k == AttackKind::kRebuttal ? "rebuttal" : "undercut"; }
inline const char* to_string(Mark m) { return m == Mark::kUndefeated ? "U" : "D"; }
inline const char* to_string(Judgement j) {
  return j == Judgement::kWarranted ? "Warranted" : "Unwarranted";
}

// The attack pairs the dialectic licenses: α2 and α1 rebut each other; each
// of α3..α6 undercuts its predecessor.
inline bool is_licensed(ArgumentSchema attacker, ArgumentSchema target, AttackKind kind) {
  const int a = static_cast<int>(attacker);
  const int t = static_cast<int>(target);
  if (kind == AttackKind::kRebuttal) return (a == 1 && t == 2) || (a == 2 && t == 1);
  return a >= 3 && t == a - 1;
}

struct TreeNode {
  Argument argument;
  std::optional<std::size_t> parent{};
  AttackKind attack = AttackKind::kUndercut;  // kind of the edge to parent
  std::vector<std::size_t> children{};
  std::optional<Mark> mark{};

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Rooted tree of arguments; a node's children are its attackers.
class ArgumentTree {
 public:
  explicit ArgumentTree(Argument root) { nodes_.push_back({std::move(root)}); }

  std::size_t attach(Argument attacker, std::size_t target, AttackKind kind) {
    if (target >= nodes_.size()) throw BoundsError("attack target out of range");
    nodes_.push_back({std::move(attacker), target, kind});
    nodes_[target].children.push_back(nodes_.size() - 1);
    return nodes_.size() - 1;
  }

  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  const TreeNode& root() const { return nodes_.front(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  void set_mark(std::size_t i, Mark m) { nodes_.at(i).mark = m; }
  bool is_marked() const {
    return std::all_of(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.mark.has_value(); });
  }

  std::size_t count(ArgumentSchema schema) const {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [&](const TreeNode& n) { return n.argument.schema == schema; }));
  }

  friend bool operator==(const ArgumentTree&, const ArgumentTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

// Features the user challenges in α3.
inline std::vector<std::size_t> challenged_features(const TruthReport& report) {
  if (!report.untruthful.empty()) return report.untruthful;
  std::vector<std::size_t> all{};
  for (const auto& e : report.evidence) all.push_back(e.feature);
  return all;
}

inline ArgumentTree build_tree(const TruthReport& report) {
  if (report.evidence.empty()) throw ContractError("cannot build a tree from an empty report");
  ArgumentTree tree(make_alpha1());
  const std::size_t a2 = tree.attach(make_alpha2(), 0, AttackKind::kRebuttal);
  const auto challenged = challenged_features(report);
  const std::size_t a3 = tree.attach(make_alpha3(challenged), a2, AttackKind::kUndercut);
  for (std::size_t j : challenged) {
    const FeatureEvidence* ev = report.find(j);
    if (!ev) throw ContractError("report lists feature " + std::to_string(j) + " without evidence");
    const std::size_t a4 = tree.attach(make_alpha4(j), a3, AttackKind::kUndercut);
    const std::size_t a5 = tree.attach(make_alpha5(j), a4, AttackKind::kUndercut);
    if (ev->truthful()) {
      for (Alt alt : kAlterations) tree.attach(make_alpha6(j, alt), a5, AttackKind::kUndercut);
    }
  }
  return tree;
}

// Post-order marking: a node is D iff some child is U; leaves are U.
inline ArgumentTree mark(ArgumentTree tree) {
  std::vector<std::pair<std::size_t, bool>> stack{{0, false}};
  while (!stack.empty()) {
    auto [i, expanded] = stack.back();
    stack.pop_back();
    const auto& children = tree.node(i).children;
    if (!expanded) {
      stack.emplace_back(i, true);
      for (std::size_t c : children) stack.emplace_back(c, false);
      continue;
    }
    const bool defeated = std::any_of(children.begin(), children.end(), [&](std::size_t c) {
      return tree.node(c).mark == Mark::kUndefeated;
    });
    tree.set_mark(i, defeated ? Mark::kDefeated : Mark::kUndefeated);
  }
  return tree;
}

// Warranted iff the root is undefeated. For this dialectic, Unwarranted means
// the explanation stands trusted.
inline Judgement judge(const ArgumentTree& tree) {
  if (!tree.root().mark) throw ContractError("judge needs a marked tree");
  return *tree.root().mark == Mark::kUndefeated ? Judgement::kWarranted : Judgement::kUnwarranted;
}

// ---------------------------------------------------------------------------
// Natural-language rendering.
// ---------------------------------------------------------------------------

enum class Speaker { kUser, kSystem };

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::string text;
  // Argument the turn voices; empty for observations that attack nothing.
  std::string argument_id;
  // Probability before/after for f turns.
  std::optional<std::pair<double, double>> probabilities{};
};

namespace internal {

// "Increased" / "Decreased" / "Remaining Stable".
inline std::string exp_past(Exp e) {
  switch (e) {
    case Exp::kIncreasing:
      return "Increased";
    case Exp::kDecreasing:
      return "Decreased";
    case Exp::kRemainingStable:
      return "Remaining Stable";
  }
  return "?";
}

inline std::string alt_past(Alt a) { return a == Alt::kIncreasing ? "Increased" : "Decreased"; }

inline std::string feature_name(const TruthReport& r, std::size_t j) {
  if (j < r.feature_names.size() && !r.feature_names[j].empty()) return r.feature_names[j];
  return "f" + std::to_string(j + 1);
}

}  // namespace internal

inline std::string render_atom_c(const TruthReport& r, std::size_t j) {
  return "The importance of " + internal::feature_name(r, j) + " is untruthful";
}

inline std::string render_atom_d(const TruthReport& r, const FeatureEvidence& e) {
  const auto& inc = e.record(Alt::kIncreasing);
  const auto& dec = e.record(Alt::kDecreasing);
  return "The importance of " + internal::feature_name(r, e.feature) + " is truthful since it has a " +
         to_string(e.imp) + " influence, and when its value is " + to_string(inc.alt) +
         " locally, we observe that the probability is " + to_string(inc.expected) +
         ", and when its value is " + to_string(dec.alt) +
         " locally, we observe that the probability is " + to_string(dec.expected);
}

inline std::string render_atom_e(const TruthReport& r, const FeatureEvidence& e, Alt alt) {
  return internal::feature_name(r, e.feature) + " has a " + to_string(e.imp) +
         " influence and is therefore expected the probability to be " +
         internal::exp_past(e.record(alt).expected) + " by " + to_string(alt) + " its value";
}

inline std::string render_atom_f(const TruthReport& r, const FeatureEvidence& e, Alt alt) {
  const auto& rec = e.record(alt);
  std::string s = internal::feature_name(r, e.feature) + "'s value got " + internal::alt_past(alt) +
                  " and evaluated and the probability is " + internal::exp_past(rec.observed);
  if (rec.matched()) return s + " as expected";
  return s + ", while it was expected to be " + internal::exp_past(rec.expected);
}

// One user/system exchange per level of the tree: a, b, the bundled c's, a
// d per challenged feature, the paired e's per feature, and an f for each
// alteration of each challenged feature.
inline std::vector<Turn> render_dialogue(const ArgumentTree& tree, const TruthReport& report) {
  if (!tree.is_marked()) throw ContractError("render_dialogue needs a marked tree");
  std::vector<Turn> turns{};
  turns.push_back({Speaker::kUser, "The explanation is untrusted", tree.root().argument.id()});
  turns.push_back({Speaker::kSystem, "The explanation is trusted", make_alpha2().id()});

  std::vector<std::size_t> challenged{};
  for (const auto& n : tree.nodes()) {
    if (n.argument.schema == ArgumentSchema::kAlpha3) challenged = n.argument.bundled;
  }
  if (tree.size() < 3) return turns;

  std::string c_text;
  for (std::size_t k = 0; k < challenged.size(); ++k) {
    if (k) c_text += ". ";
    c_text += render_atom_c(report, challenged[k]);
  }
  turns.push_back({Speaker::kUser, c_text, make_alpha3(challenged).id()});

  std::vector<const FeatureEvidence*> evidence{};
  for (std::size_t j : challenged) {
    const FeatureEvidence* e = report.find(j);
    if (!e) throw ContractError("tree and report disagree on feature " + std::to_string(j));
    evidence.push_back(e);
  }
  for (const auto* e : evidence) {
    turns.push_back({Speaker::kSystem, render_atom_d(report, *e), make_alpha4(e->feature).id()});
  }
  for (const auto* e : evidence) {
    turns.push_back({Speaker::kUser,
                     render_atom_e(report, *e, Alt::kIncreasing) + ". " +
                         render_atom_e(report, *e, Alt::kDecreasing),
                     make_alpha5(e->feature).id()});
  }
  for (const auto* e : evidence) {
    for (Alt alt : kAlterations) {
      const auto& rec = e->record(alt);
      turns.push_back({Speaker::kSystem, render_atom_f(report, *e, alt),
                       e->truthful() ? make_alpha6(e->feature, alt).id() : std::string(),
                       std::make_pair(rec.probability_before, rec.probability_after)});
    }
  }
  return turns;
}

inline std::string format_dialogue(const std::vector<Turn>& turns) {
  std::ostringstream out;
  for (const auto& t : turns) {
    out << (t.speaker == Speaker::kUser ? "User: " : "System: ") << t.text;
    if (t.probabilities) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), " [%.4f -> %.4f]", t.probabilities->first, t.probabilities->second);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const Turn& t) {
  nlohmann::json j{{"speaker", t.speaker == Speaker::kUser ? "user" : "system"},
                   {"text", t.text},
                   {"argument", t.argument_id}};
  if (t.probabilities) {
    j["probability_before"] = t.probabilities->first;
    j["probability_after"] = t.probabilities->second;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Export.
// ---------------------------------------------------------------------------

enum class TreeFormat { kText, kGraph, kStructured };

inline TreeFormat tree_format_from_string(const std::string& s) {
  if (s == "text") return TreeFormat::kText;
  if (s == "dot" || s == "graph") return TreeFormat::kGraph;
  if (s == "json" || s == "structured") return TreeFormat::kStructured;
  throw UsageError("unknown tree format '" + s + "' (expected text, dot or json)");
}

inline nlohmann::json tree_to_json(const ArgumentTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    nlohmann::json node{{"index", i},
                        {"id", n.argument.id()},
                        {"schema", static_cast<int>(n.argument.schema)},
                        {"argument", n.argument.str()}};
    if (n.argument.feature) node["feature"] = *n.argument.feature;
    if (n.argument.alt) node["alt"] = to_string(*n.argument.alt);
    if (n.argument.schema == ArgumentSchema::kAlpha3) node["bundled"] = n.argument.bundled;
    node["mark"] = n.mark ? nlohmann::json(to_string(*n.mark)) : nlohmann::json(nullptr);
    nodes.push_back(node);
    if (n.parent) edges.push_back({{"attacker", i}, {"target", *n.parent}, {"kind", to_string(n.attack)}});
  }
  nlohmann::json j{{"nodes", nodes}, {"edges", edges}};
  if (tree.is_marked()) j["judgement"] = to_string(judge(tree));
  return j;
}

inline ArgumentTree tree_from_json(const nlohmann::json& j) {
  try {
    const auto& nodes = j.at("nodes");
    if (nodes.empty()) throw LoadError("tree has no nodes");
    auto argument_of = [](const nlohmann::json& n) {
      const int schema = n.at("schema").get<int>();
      const auto feature = n.contains("feature") ? n["feature"].get<std::size_t>() : 0;
      switch (schema) {
        case 1:
          return make_alpha1();
        case 2:
          return make_alpha2();
        case 3:
          return make_alpha3(n.at("bundled").get<std::vector<std::size_t>>());
        case 4:
          return make_alpha4(feature);
        case 5:
          return make_alpha5(feature);
        case 6:
          return make_alpha6(feature, alt_from_string(n.at("alt").get<std::string>()));
        default:
          throw LoadError("unknown argument schema " + std::to_string(schema));
      }
    };
    std::vector<std::optional<std::pair<std::size_t, AttackKind>>> parent(nodes.size());
    for (const auto& e : j.at("edges")) {
      const auto attacker = e.at("attacker").get<std::size_t>();
      const auto target = e.at("target").get<std::size_t>();
      const auto kind = e.at("kind").get<std::string>() == "rebuttal" ? AttackKind::kRebuttal
                                                                      : AttackKind::kUndercut;
      if (attacker >= nodes.size() || target >= attacker) throw LoadError("edge out of order");
      parent[attacker] = std::make_pair(target, kind);
    }
    ArgumentTree tree(argument_of(nodes[0]));
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (!parent[i]) throw LoadError("node " + std::to_string(i) + " has no attack edge");
      tree.attach(argument_of(nodes[i]), parent[i]->first, parent[i]->second);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& m = nodes[i].at("mark");
      if (!m.is_null()) tree.set_mark(i, m.get<std::string>() == "U" ? Mark::kUndefeated : Mark::kDefeated);
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed tree JSON: ") + e.what());
  }
}

namespace internal {

inline std::string mark_suffix(const TreeNode& n) {
  return n.mark ? std::string(" [") + to_string(*n.mark) + "]" : std::string();
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace internal

inline std::string export_tree(const ArgumentTree& tree, TreeFormat format) {
  std::ostringstream out;
  switch (format) {
    case TreeFormat::kText: {
      std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
      while (!stack.empty()) {
        const auto [i, depth] = stack.back();
        stack.pop_back();
        const auto& n = tree.node(i);
        out << std::string(2 * depth, ' ');
        if (n.parent) out << "(" << to_string(n.attack) << ") ";
        out << n.argument.id() << " " << n.argument.str() << internal::mark_suffix(n) << '\n';
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.emplace_back(*it, depth + 1);
      }
      break;
    }
    case TreeFormat::kGraph: {
      out << "digraph argument_tree {\n  rankdir=BT;\n";
      for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree.node(i);
        out << "  n" << i << " [label=\"" << internal::dot_escape(n.argument.id() + internal::mark_suffix(n))
            << "\"];\n";
      }
      for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree.node(i);
        if (n.parent) out << "  n" << i << " -> n" << *n.parent << " [label=\"" << to_string(n.attack) << "\"];\n";
      }
      out << "}\n";
      break;
    }
    case TreeFormat::kStructured:
      out << tree_to_json(tree).dump(2) << '\n';
      break;
  }
  return out.str();
}

}  // namespace truthcheck
