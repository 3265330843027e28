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

#include "truthcheck/argumentation.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/scenarios.hpp"
#include "truthcheck/investigator.hpp"

namespace truthcheck {
namespace {

using testing::ChildrenOf;
using testing::RandomReport;
using testing::TreeFromShape;

TruthReport JohnReport() {
  const auto s = testing::JohnExample();
  return investigate(*s.model, s.z, s.x, s.data);
}

TEST(Atoms, SymbolsAndArguments) {
  EXPECT_EQ((Atom{AtomKind::kE, 0, Alt::kIncreasing}.symbol()), "e_1,inc");
  EXPECT_EQ(make_alpha6(1, Alt::kDecreasing).id(), "α6(2,dec)");
  EXPECT_EQ(make_alpha1().str(), "⟨{a}, a⟩");
  EXPECT_EQ(make_alpha2().str(), "⟨{b, b → ¬a}, ¬a⟩");
  EXPECT_EQ(make_alpha3({0, 2}).str(), "⟨{c_1, c_3, (c_1 ∧ c_3) → ¬b}, ¬b⟩");
  EXPECT_EQ(make_alpha5(0).str(), "⟨{e_1,inc, e_1,dec, (e_1,inc ∧ e_1,dec) → ¬d_1}, ¬d_1⟩");
}

TEST(Attacks, OnlyTableEdgesAreLicensed) {
  using S = ArgumentSchema;
  EXPECT_TRUE(is_licensed(S::kAlpha2, S::kAlpha1, AttackKind::kRebuttal));
  EXPECT_TRUE(is_licensed(S::kAlpha1, S::kAlpha2, AttackKind::kRebuttal));
  EXPECT_TRUE(is_licensed(S::kAlpha3, S::kAlpha2, AttackKind::kUndercut));
  EXPECT_TRUE(is_licensed(S::kAlpha6, S::kAlpha5, AttackKind::kUndercut));
  EXPECT_FALSE(is_licensed(S::kAlpha3, S::kAlpha1, AttackKind::kUndercut));
  EXPECT_FALSE(is_licensed(S::kAlpha2, S::kAlpha1, AttackKind::kUndercut));
  EXPECT_FALSE(is_licensed(S::kAlpha4, S::kAlpha3, AttackKind::kRebuttal));
  EXPECT_FALSE(is_licensed(S::kAlpha5, S::kAlpha6, AttackKind::kUndercut));
}

TEST(BuildTree, JohnExampleHasFifteenArguments) {
  const auto tree = build_tree(JohnReport());
  EXPECT_EQ(tree.size(), 15u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha1), 1u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha2), 1u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha3), 1u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha4), 3u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha5), 3u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha6), 6u);
  for (const auto& n : tree.nodes()) {
    if (n.argument.schema == ArgumentSchema::kAlpha5) {
      EXPECT_EQ(n.children.size(), 2u);
    }
    if (n.parent) {
      EXPECT_TRUE(is_licensed(n.argument.schema, tree.node(*n.parent).argument.schema, n.attack));
    }
  }
}

TEST(BuildTree, SingleTruthfulFeatureHasSevenArguments) {
  const auto s = testing::RunningExample();
  TruthReport r = investigate(*s.model, s.z, s.x, s.data);
  r.evidence[0].records[1].observed = Exp::kDecreasing;
  r.classify();
  EXPECT_EQ(build_tree(r).size(), 7u);
}

TEST(BuildTree, UntruthfulFeatureLeavesAlpha5Unanswered) {
  const auto s = testing::RunningExample();
  const auto tree = mark(build_tree(investigate(*s.model, s.z, s.x, s.data)));
  EXPECT_EQ(tree.size(), 5u);
  EXPECT_EQ(tree.count(ArgumentSchema::kAlpha6), 0u);
  EXPECT_EQ(judge(tree), Judgement::kWarranted);
}

TEST(BuildTree, EmptyReportIsRejected) {
  EXPECT_THROW(build_tree(TruthReport{}), ContractError);
}

TEST(Mark, ChainsAlternate) {
  for (std::size_t n = 1; n <= 9; ++n) {
    std::vector<std::vector<std::size_t>> chain(n);
    for (std::size_t i = 0; i + 1 < n; ++i) chain[i] = {i + 1};
    const auto tree = mark(TreeFromShape(chain));
    for (std::size_t i = 0; i < n; ++i) {
      const Mark expected = (n - 1 - i) % 2 == 0 ? Mark::kUndefeated : Mark::kDefeated;
      EXPECT_EQ(*tree.node(i).mark, expected) << "n=" << n << " node " << i;
    }
  }
}

TEST(Mark, RootWithOneUndefeatedChildAmongMany) {
  // Root has a leaf child (U) and a child that is attacked by a leaf (D).
  const auto tree = mark(TreeFromShape({{1, 2}, {}, {3}, {}}));
  EXPECT_EQ(*tree.node(1).mark, Mark::kUndefeated);
  EXPECT_EQ(*tree.node(2).mark, Mark::kDefeated);
  EXPECT_EQ(*tree.node(0).mark, Mark::kDefeated);
}

TEST(Mark, MatchesUniqueConsistentLabellingOnRandomTrees) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) % 16;
    const auto shape = testing::random_tree(n, gen);
    const auto oracle = testing::enumerate_all_labellings(shape);
    ASSERT_EQ(oracle.consistent, 1u);
    const auto tree = mark(TreeFromShape(shape));
    for (std::size_t i = 0; i < n; ++i) {
      const bool u = (oracle.labelling >> i) & 1u;
      EXPECT_EQ(*tree.node(i).mark == Mark::kUndefeated, u);
    }
  }
}

TEST(Judge, RequiresMarks) {
  EXPECT_THROW(judge(build_tree(JohnReport())), ContractError);
  EXPECT_EQ(judge(mark(build_tree(JohnReport()))), Judgement::kUnwarranted);
}

TEST(Judge, UnwarrantedExactlyWhenNothingIsUntruthful) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto report = RandomReport(1 + static_cast<std::size_t>(trial) % 10, gen);
    const auto tree = mark(build_tree(report));
    EXPECT_EQ(judge(tree) == Judgement::kUnwarranted, report.untruthful.empty());
    if (tree.size() > 25) continue;
    const auto oracle = testing::enumerate_labellings(ChildrenOf(tree));
    EXPECT_EQ(oracle.consistent, 1u);
    EXPECT_EQ((oracle.labelling & 1u) != 0, judge(tree) == Judgement::kWarranted);
  }
}

TEST(Dialogue, JohnExampleTemplates) {
  const TruthReport report = JohnReport();
  const auto tree = mark(build_tree(report));
  const auto turns = render_dialogue(tree, report);
  ASSERT_EQ(turns.size(), 15u);
  EXPECT_EQ(turns[0].text, "The explanation is untrusted");
  EXPECT_EQ(turns[1].text, "The explanation is trusted");
  EXPECT_EQ(turns[2].text,
            "The importance of A is untruthful. The importance of H is untruthful. "
            "The importance of W is untruthful");
  EXPECT_EQ(turns[3].text,
            "The importance of A is truthful since it has a Negative influence, and when its value is "
            "Increasing locally, we observe that the probability is Decreasing, and when its value is "
            "Decreasing locally, we observe that the probability is Increasing");
  EXPECT_EQ(turns[4].text,
            "The importance of H is truthful since it has a Positive influence, and when its value is "
            "Increasing locally, we observe that the probability is Increasing, and when its value is "
            "Decreasing locally, we observe that the probability is Decreasing");
  EXPECT_EQ(turns[5].text,
            "The importance of W is truthful since it has a Neutral influence, and when its value is "
            "Increasing locally, we observe that the probability is Remaining Stable, and when its value is "
            "Decreasing locally, we observe that the probability is Remaining Stable");
  EXPECT_EQ(turns[7].text,
            "H has a Positive influence and is therefore expected the probability to be Increased by "
            "Increasing its value. H has a Positive influence and is therefore expected the probability "
            "to be Decreased by Decreasing its value");
  EXPECT_EQ(turns[11].text, "H's value got Increased and evaluated and the probability is Increased as expected");
  EXPECT_EQ(turns[12].text, "H's value got Decreased and evaluated and the probability is Decreased as expected");
  ASSERT_TRUE(turns[11].probabilities.has_value());
  EXPECT_DOUBLE_EQ(turns[11].probabilities->first, 0.25);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const bool user_turn = i == 0 || i == 2 || (i >= 6 && i <= 8);
    EXPECT_EQ(turns[i].speaker, user_turn ? Speaker::kUser : Speaker::kSystem) << i;
  }
  const std::string text = format_dialogue(turns);
  EXPECT_EQ(text.rfind("User: The explanation is untrusted\nSystem: The explanation is trusted\n", 0), 0u);
}

TEST(Dialogue, MismatchedObservationIsReported) {
  const auto s = testing::EntropyCase();
  const auto report = investigate(*s.model, s.z, s.x, s.data);
  const auto turns = render_dialogue(mark(build_tree(report)), report);
  ASSERT_EQ(turns.size(), 7u);
  EXPECT_EQ(turns[5].text,
            "entropy's value got Increased and evaluated and the probability is Decreased, while it was "
            "expected to be Increased");
  EXPECT_EQ(turns[6].text,
            "entropy's value got Decreased and evaluated and the probability is Increased, while it was "
            "expected to be Decreased");
  EXPECT_TRUE(turns[5].argument_id.empty());
}

TEST(Export, TextGraphAndJson) {
  const auto s = testing::RunningExample();
  TruthReport r = investigate(*s.model, s.z, s.x, s.data);
  r.evidence[0].records[1].observed = Exp::kDecreasing;
  r.classify();
  const auto tree = mark(build_tree(r));
  const std::string text = export_tree(tree, TreeFormat::kText);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  EXPECT_EQ(text.rfind("α1 ⟨{a}, a⟩ [D]\n", 0), 0u);
  EXPECT_NE(text.find("  (rebuttal) α2 "), std::string::npos);
  EXPECT_NE(text.find("      (undercut) α4(1) "), std::string::npos);
  EXPECT_NE(text.find("α6(1,dec) ⟨{f_1,dec, f_1,dec → ¬e_1,dec}, ¬e_1,dec⟩ [U]"), std::string::npos);

  const std::string dot = export_tree(tree, TreeFormat::kGraph);
  EXPECT_EQ(dot.rfind("digraph argument_tree {", 0), 0u);
  EXPECT_NE(dot.find("n1 -> n0 [label=\"rebuttal\"]"), std::string::npos);
  EXPECT_NE(dot.find("n2 -> n1 [label=\"undercut\"]"), std::string::npos);

  const auto json = nlohmann::json::parse(export_tree(tree, TreeFormat::kStructured));
  EXPECT_EQ(json["judgement"], "Unwarranted");
  EXPECT_EQ(tree_from_json(json), tree);
  EXPECT_THROW(tree_format_from_string("svg"), UsageError);
}

}  // namespace
}  // namespace truthcheck
