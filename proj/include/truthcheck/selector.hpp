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
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "truthcheck/argumentation.hpp"
#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/importance.hpp"
#include "truthcheck/investigator.hpp"
#include "truthcheck/models.hpp"
#include "truthcheck/rng.hpp"

namespace truthcheck {

// Zeroes and flags every untruthful entry; truthful entries are untouched.
inline ImportanceVector reduce(const TruthReport& report, const ImportanceVector& z) {
  if (report.technique_id != z.technique_id) {
    throw ContractError("report is for '" + report.technique_id + "', importance vector for '" +
                        z.technique_id + "'");
  }
  if (report.num_features != z.size()) throw ContractError("report and importance vector arity differ");
  ImportanceVector out = z;
  out.excluded.resize(z.size(), false);
  for (std::size_t j : report.untruthful) {
    if (j >= z.size()) throw ContractError("report names feature outside the importance vector");
    out.values[j] = 0.0;
    out.excluded[j] = true;
  }
  return out;
}

struct Reexamination {
  Judgement verdict = Judgement::kUnwarranted;
  // Every feature was excluded; the verdict holds vacuously.
  bool vacuous = false;
  // The re-investigation found a failure the first pass did not (only
  // possible with stochastic perturbation).
  bool unstable = false;
  TruthReport report;
  std::optional<ArgumentTree> tree{};
};

// Re-tests the surviving features of a reduced interpretation and judges the
// rebuilt tree. Stochastic runs draw from a seed derived from opts.seed.
inline Reexamination reexamine(const Predictor& m, const ImportanceVector& reduced, const Instance& x,
                               const Dataset& ds, InvestigatorOptions opts = {}) {
  Reexamination out;
  const bool all_excluded = reduced.size() > 0 && std::all_of(reduced.excluded.begin(), reduced.excluded.end(),
                                                              [](bool b) { return b; }) &&
                            reduced.excluded.size() == reduced.size();
  if (all_excluded) {
    out.vacuous = true;
    out.report.technique_id = reduced.technique_id;
    out.report.num_features = reduced.size();
    out.report.feature_names = ds.feature_names();
    out.report.warnings.push_back("every importance was excluded; the interpretation is empty");
    return out;
  }
  if (opts.mode == PerturbMode::kStochastic) opts.seed = derive_seed(opts.seed, "reexamine");
  out.report = investigate(m, reduced, x, ds, opts);
  out.tree = mark(build_tree(out.report));
  out.verdict = judge(*out.tree);
  out.unstable = !out.report.untruthful.empty();
  return out;
}

// Technique with the fewest untruthful features; ties go to the technique
// listed first in `priority`, then to input order.
inline std::size_t select_best_index(const std::vector<std::pair<std::string, TruthReport>>& results,
                                     const std::vector<std::string>& priority = {}) {
  if (results.empty()) throw ContractError("select_best needs at least one candidate");
  auto rank = [&](std::size_t i) {
    const auto it = std::find(priority.begin(), priority.end(), results[i].first);
    return std::make_pair(results[i].second.untruthful.size(),
                          it == priority.end() ? priority.size() + i
                                               : static_cast<std::size_t>(it - priority.begin()));
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (rank(i) < rank(best)) best = i;
  }
  return best;
}

inline std::string select_best(const std::vector<std::pair<std::string, TruthReport>>& results,
                               const std::vector<std::string>& priority = {}) {
  return results[select_best_index(results, priority)].first;
}

// ---------------------------------------------------------------------------
// Whole pipeline for one instance.
// ---------------------------------------------------------------------------

enum class ClassTarget { kPredicted, kPositive, kNegative };

inline ClassTarget class_target_from_string(const std::string& s) {
  if (s == "predicted") return ClassTarget::kPredicted;
  if (s == "positive") return ClassTarget::kPositive;
  if (s == "negative") return ClassTarget::kNegative;
  throw UsageError("unknown class target '" + s + "' (expected predicted, positive or negative)");
}

inline std::vector<std::string> default_priority() {
  return {kIntrinsic, kPermutation, kLime, kKernelShap};
}

struct EvaluationConfig {
  InvestigatorOptions investigator;
  PermutationOptions permutation;
  LimeOptions lime;
  ShapOptions shap;
  IntrinsicForm intrinsic_form = IntrinsicForm::kCoefficient;
  std::vector<std::string> priority = default_priority();
  ClassTarget class_target = ClassTarget::kPredicted;
  // Root of every technique and investigation seed.
  std::uint64_t seed = 0;
};

struct EvaluationResult {
  std::string chosen_technique;
  // 1 when the positive-class probability is tracked, 0 for its complement.
  int target_class = 1;
  std::vector<ImportanceVector> importances{};
  std::vector<TruthReport> reports{};
  std::vector<std::size_t> untruthful_counts{};
  std::vector<Judgement> initial_judgements{};
  ImportanceVector reduced_importance;
  Judgement final_judgement = Judgement::kUnwarranted;
  bool vacuous = false;
  bool unstable = false;
  std::vector<ArgumentTree> initial_trees{};
  std::optional<ArgumentTree> final_tree{};
  TruthReport final_report;
  std::vector<Turn> dialogue{};
  std::vector<std::string> warnings{};

  std::size_t chosen_index() const {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (reports[i].technique_id == chosen_technique) return i;
    }
    return 0;
  }
};

inline bool is_known_technique(const std::string& id) {
  return id == kIntrinsic || id == kPermutation || id == kLime || id == kKernelShap;
}

// Computes one technique's importances for x against the tracked-class view.
inline ImportanceVector run_technique(const std::string& id, const Predictor& view, const Dataset& ds,
                                      const Instance& x, const EvaluationConfig& cfg,
                                      std::uint64_t instance_key) {
  if (id == kIntrinsic) return intrinsic_linear(view, x, cfg.intrinsic_form);
  if (id == kPermutation) {
    PermutationOptions o = cfg.permutation;
    o.seed = derive_seed(cfg.seed, "permutation", {instance_key});
    return permutation_importance(view, ds, x, o);
  }
  if (id == kLime) {
    LimeOptions o = cfg.lime;
    o.seed = derive_seed(cfg.seed, "lime", {instance_key});
    return lime_like(view, ds, x, o);
  }
  if (id == kKernelShap) {
    ShapOptions o = cfg.shap;
    o.seed = derive_seed(cfg.seed, "shap", {instance_key});
    return kernel_shap_like(view, ds, x, o);
  }
  throw UsageError("unknown technique '" + id + "'");
}

// Runs every technique (plus any imported explanations), investigates each,
// judges each tree, keeps the technique with the fewest untruthful features,
// reduces it and re-examines the reduction.
inline EvaluationResult evaluate_instance(const Predictor& m, const std::vector<std::string>& techniques,
                                          const Instance& x, const Dataset& ds, const EvaluationConfig& cfg = {},
                                          const std::vector<ImportanceVector>& imported = {},
                                          std::uint64_t instance_key = 0) {
  if (techniques.empty() && imported.empty()) throw ContractError("evaluate_instance needs a technique");
  for (const auto& t : techniques) {
    if (!is_known_technique(t)) throw UsageError("unknown technique '" + t + "'");
  }
  if (x.size() != m.arity() || ds.num_features() != m.arity()) {
    throw ContractError("instance arity does not match the model");
  }

  EvaluationResult result;
  bool negative = cfg.class_target == ClassTarget::kNegative;
  if (cfg.class_target == ClassTarget::kPredicted) negative = m.predict_proba(x) < 0.5;
  result.target_class = negative ? 0 : 1;
  std::unique_ptr<ComplementPredictor> complement;
  std::optional<Dataset> flipped{};
  if (negative) {
    complement = std::make_unique<ComplementPredictor>(m);
    flipped.emplace(ds.with_flipped_labels());
  }
  const Predictor& view = negative ? static_cast<const Predictor&>(*complement) : m;
  const Dataset& data = negative ? *flipped : ds;

  for (const auto& id : techniques) result.importances.push_back(run_technique(id, view, data, x, cfg, instance_key));
  for (const auto& z : imported) {
    ImportanceVector copy = z;
    if (copy.target_instance.values.empty()) copy.target_instance = x;
    if (copy.size() != x.size()) throw ContractError("imported importance vector has the wrong arity");
    result.importances.push_back(std::move(copy));
  }

  std::vector<std::pair<std::string, TruthReport>> candidates{};
  std::vector<double> bands{};
  for (std::size_t t = 0; t < result.importances.size(); ++t) {
    InvestigatorOptions o = cfg.investigator;
    o.seed = derive_seed(cfg.seed, "investigate", {instance_key, t});
    bands.push_back(neutral_band(result.importances[t], o));
    TruthReport report = investigate(view, result.importances[t], x, ds, o);
    result.untruthful_counts.push_back(report.untruthful.size());
    ArgumentTree tree = mark(build_tree(report));
    result.initial_judgements.push_back(judge(tree));
    result.initial_trees.push_back(std::move(tree));
    for (const auto& w : report.warnings) result.warnings.push_back(report.technique_id + ": " + w);
    for (const auto& w : result.importances[t].warnings) result.warnings.push_back(report.technique_id + ": " + w);
    result.reports.push_back(report);
    candidates.emplace_back(report.technique_id, std::move(report));
  }

  const std::size_t best = select_best_index(candidates, cfg.priority);
  result.chosen_technique = candidates[best].first;
  result.reduced_importance = reduce(result.reports[best], result.importances[best]);

  InvestigatorOptions o = cfg.investigator;
  o.seed = derive_seed(cfg.seed, "investigate", {instance_key, best});
  // Zeroing entries must not move the neutrality band of the survivors.
  o.neutral_band_absolute = bands[best];
  Reexamination re = reexamine(view, result.reduced_importance, x, ds, o);
  result.final_judgement = re.verdict;
  result.vacuous = re.vacuous;
  result.unstable = re.unstable;
  for (const auto& w : re.report.warnings) result.warnings.push_back("reexamine: " + w);
  result.final_report = std::move(re.report);
  result.final_tree = std::move(re.tree);

  result.dialogue = render_dialogue(result.initial_trees[best], result.reports[best]);
  if (!result.reports[best].untruthful.empty() && result.final_tree) {
    const auto after = render_dialogue(*result.final_tree, result.final_report);
    result.dialogue.insert(result.dialogue.end(), after.begin(), after.end());
  }
  return result;
}

inline nlohmann::json to_json(const EvaluationResult& r) {
  nlohmann::json techniques = nlohmann::json::array();
  for (std::size_t t = 0; t < r.reports.size(); ++t) {
    techniques.push_back({{"technique", r.reports[t].technique_id},
                          {"importance", to_json(r.importances[t])},
                          {"untruthful_count", r.untruthful_counts[t]},
                          {"judgement", to_string(r.initial_judgements[t])},
                          {"report", to_json(r.reports[t])}});
  }
  nlohmann::json dialogue = nlohmann::json::array();
  for (const auto& t : r.dialogue) dialogue.push_back(to_json(t));
  nlohmann::json j{{"chosen_technique", r.chosen_technique},
                   {"target_class", r.target_class},
                   {"reduced_importance", to_json(r.reduced_importance)},
                   {"techniques", techniques},
                   {"final_judgement", to_string(r.final_judgement)},
                   {"vacuous", r.vacuous},
                   {"unstable", r.unstable},
                   {"initial_tree", tree_to_json(r.initial_trees[r.chosen_index()])},
                   {"dialogue", dialogue}};
  j["final_tree"] = r.final_tree ? tree_to_json(*r.final_tree) : nlohmann::json(nullptr);
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

}  // namespace truthcheck
