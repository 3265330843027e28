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

// Random inputs shared by the unit and acceptance suites.

#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "truthcheck/argumentation.hpp"
#include "truthcheck/investigator.hpp"

namespace truthcheck::testing {

// A report in which every feature gets a random importance sign and, a third
// of the time, a random observation per alteration.
inline TruthReport RandomReport(std::size_t f, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> three(0, 2);
  TruthReport r;
  r.technique_id = "random";
  r.num_features = f;
  r.delta = 0.01;
  r.baseline_probability = 0.5;
  for (std::size_t j = 0; j < f; ++j) {
    r.feature_names.push_back("f" + std::to_string(j + 1));
    FeatureEvidence e;
    e.feature = j;
    e.name = r.feature_names.back();
    e.imp = static_cast<Imp>(three(gen));
    for (Alt alt : kAlterations) {
      auto& rec = e.records[alt == Alt::kIncreasing ? 0 : 1];
      rec.alt = alt;
      rec.expected = expected_direction(e.imp, alt);
      rec.observed = three(gen) == 0 ? static_cast<Exp>(three(gen)) : rec.expected;
    }
    r.evidence.push_back(e);
  }
  r.classify();
  return r;
}

// Tree with the given shape; parents must precede their children.
inline ArgumentTree TreeFromShape(const std::vector<std::vector<std::size_t>>& children) {
  std::vector<std::size_t> parent(children.size(), 0);
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (std::size_t c : children[i]) parent[c] = i;
  }
  ArgumentTree tree(make_alpha1());
  for (std::size_t i = 1; i < children.size(); ++i) tree.attach(make_alpha4(i), parent[i], AttackKind::kUndercut);
  return tree;
}

inline std::vector<std::vector<std::size_t>> ChildrenOf(const ArgumentTree& tree) {
  std::vector<std::vector<std::size_t>> children(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) children[i] = tree.node(i).children;
  return children;
}

// Like random_tree, but each node attaches to one of the `window` most recent
// nodes, which yields deep, chain-like trees.
inline std::vector<std::vector<std::size_t>> deep_random_tree(std::size_t n, std::size_t window,
                                                              std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    std::uniform_int_distribution<std::size_t> pick(lo, i - 1);
    children[pick(rng)].push_back(i);
  }
  return children;
}

}  // namespace truthcheck::testing
