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

// Scripted predictors reproducing the worked examples used across suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/importance.hpp"
#include "truthcheck/models.hpp"

namespace truthcheck::testing {

struct Scenario {
  Dataset data;
  std::shared_ptr<const Predictor> model;
  ImportanceVector z;
  Instance x;
};

// One feature at value 1 with importance 0.5 and baseline 0.7. Raising the
// value lifts the probability to 0.85; lowering it leaves it at 0.7.
inline Scenario RunningExample() {
  Dataset ds({{"f1", FeatureKind::kContinuous, {}}}, {{0.79}, {1.21}});
  auto model = std::make_shared<FunctionPredictor>(
      1, [](std::span<const double> v) { return v[0] > 1.0 ? 0.85 : 0.7; }, "scripted");
  const Instance x{{1.0}};
  ImportanceVector z{kLime, {0.5}, x, 0.7};
  return {std::move(ds), std::move(model), std::move(z), x};
}

// Banknote-shaped instance whose entropy reacts against its positive
// importance: 81.45% -> 9.10% when raised to 1.642 and -> 98.17% when
// lowered to -2.531. The other three features move the probability by
// 0.02 per unit in the directions given by kEntropyCaseSlopes.
inline constexpr double kEntropyCaseSlopes[3] = {0.02, 0.02, -0.02};
inline constexpr double kEntropyStd = 2.0865;

inline Scenario EntropyCase() {
  const std::vector<double> x{0.380, 0.780, 0.757, -0.445};
  std::vector<std::vector<double>> rows;
  for (double s : {-1.0, 1.0}) {
    rows.push_back({x[0] + s, x[1] + s, x[2] + s, x[3] + s * kEntropyStd});
  }
  Dataset ds({{"variance", FeatureKind::kContinuous, {}},
              {"skew", FeatureKind::kContinuous, {}},
              {"curtosis", FeatureKind::kContinuous, {}},
              {"entropy", FeatureKind::kContinuous, {}}},
             rows);
  auto model = std::make_shared<FunctionPredictor>(
      4,
      [x](std::span<const double> v) {
        double p = 0.8145;
        if (v[3] > x[3] + 1.0) p = 0.0910;
        if (v[3] < x[3] - 1.0) p = 0.9817;
        for (int j = 0; j < 3; ++j) p += kEntropyCaseSlopes[j] * (v[j] - x[j]);
        return std::clamp(p, 0.0, 1.0);
      },
      "scripted");
  const Instance inst{x};
  ImportanceVector z{kPermutation, {0.1, 0.05, -0.03, 0.2}, inst, 0.8145};
  return {std::move(ds), std::move(model), std::move(z), inst};
}

// Three features A(ge), H(eight), W(eight) with importances (-0.7, 0.5, 0)
// and a model that agrees with all three: baseline 0.25.
inline Scenario JohnExample() {
  Dataset ds({{"A", FeatureKind::kContinuous, {}},
              {"H", FeatureKind::kContinuous, {}},
              {"W", FeatureKind::kContinuous, {}}},
             {{21.0, 162.0, 56.0}, {27.0, 178.0, 66.0}});
  auto model = std::make_shared<FunctionPredictor>(
      3,
      [](std::span<const double> v) {
        return sigmoid(std::log(1.0 / 3.0) - 0.1 * (v[0] - 24.0) + 0.05 * (v[1] - 170.0));
      },
      "scripted");
  const Instance x{{24.0, 170.0, 61.0}};
  ImportanceVector z{kLime, {-0.7, 0.5, 0.0}, x, 0.25};
  return {std::move(ds), std::move(model), std::move(z), x};
}

}  // namespace truthcheck::testing
