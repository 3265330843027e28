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
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/importance.hpp"
#include "truthcheck/models.hpp"
#include "truthcheck/rng.hpp"

namespace truthcheck {

// Effect a technique assigns to a feature.
enum class Imp { kPositive, kNegative, kNeutral };
// Direction a feature's value is moved in.
enum class Alt { kIncreasing, kDecreasing };
// Movement of the model's probability, expected or observed.
enum class Exp { kIncreasing, kDecreasing, kRemainingStable };

inline constexpr std::array<Alt, 2> kAlterations{Alt::kIncreasing, Alt::kDecreasing};

inline const char* to_string(Imp v) {
  switch (v) {
    case Imp::kPositive:
      return "Positive";
    case Imp::kNegative:
      return "Negative";
    case Imp::kNeutral:
      return "Neutral";
  }
  return "?";
}

inline const char* to_string(Alt v) { return v == Alt::kIncreasing ? "Increasing" : "Decreasing"; }

inline const char* to_string(Exp v) {
  switch (v) {
    case Exp::kIncreasing:
      return "Increasing";
    case Exp::kDecreasing:
      return "Decreasing";
    case Exp::kRemainingStable:
      return "Remaining Stable";
  }
  return "?";
}

inline Imp imp_from_string(const std::string& s) {
  if (s == "Positive") return Imp::kPositive;
  if (s == "Negative") return Imp::kNegative;
  if (s == "Neutral") return Imp::kNeutral;
  throw LoadError("unknown importance label '" + s + "'");
}

inline Alt alt_from_string(const std::string& s) {
  if (s == "Increasing") return Alt::kIncreasing;
  if (s == "Decreasing") return Alt::kDecreasing;
  throw LoadError("unknown alteration label '" + s + "'");
}

inline Exp exp_from_string(const std::string& s) {
  if (s == "Increasing") return Exp::kIncreasing;
  if (s == "Decreasing") return Exp::kDecreasing;
  if (s == "Remaining Stable") return Exp::kRemainingStable;
  throw LoadError("unknown expectation label '" + s + "'");
}

// Stable iff |after - before| <= delta.
inline Exp classify_direction(double before, double after, double delta) {
  const double diff = after - before;
  if (std::abs(diff) <= delta) return Exp::kRemainingStable;
  return diff > delta ? Exp::kIncreasing : Exp::kDecreasing;
}

// Positive: the probability follows the value. Negative: it opposes it.
// Neutral: it stays put.
inline Exp expected_direction(Imp imp, Alt alt) {
  switch (imp) {
    case Imp::kPositive:
      return alt == Alt::kIncreasing ? Exp::kIncreasing : Exp::kDecreasing;
    case Imp::kNegative:
      return alt == Alt::kIncreasing ? Exp::kDecreasing : Exp::kIncreasing;
    case Imp::kNeutral:
      return Exp::kRemainingStable;
  }
  return Exp::kRemainingStable;
}

inline Imp classify_importance(double z, double band) {
  if (std::abs(z) <= band) return Imp::kNeutral;
  return z > 0.0 ? Imp::kPositive : Imp::kNegative;
}

// ---------------------------------------------------------------------------
// Perturbation.
// ---------------------------------------------------------------------------

enum class PerturbMode { kDeterministic, kStochastic };

// Deterministic: v +/- std_dev. Stochastic: v +/- |eps|, eps ~ N(0, std_dev^2).
// Binary features jump to 1 / 0; ordinals step one level and clamp at the
// ends. A zero-variance continuous feature uses max(|v|, 1) * 0.1 instead of
// its std_dev.
inline double perturb(const FeatureMeta& meta, double v, Alt alt,
                      PerturbMode mode = PerturbMode::kDeterministic, Rng* rng = nullptr) {
  const double sign = alt == Alt::kIncreasing ? 1.0 : -1.0;
  switch (meta.kind) {
    case FeatureKind::kBinaryOneHot:
      return alt == Alt::kIncreasing ? 1.0 : 0.0;
    case FeatureKind::kOrdinal: {
      const auto& levels = meta.levels;
      if (levels.empty()) return v;
      // Position of v among the levels; values between levels snap outward.
      if (alt == Alt::kIncreasing) {
        const auto it = std::upper_bound(levels.begin(), levels.end(), v);
        return it == levels.end() ? levels.back() : *it;
      }
      const auto it = std::lower_bound(levels.begin(), levels.end(), v);
      return it == levels.begin() ? levels.front() : *std::prev(it);
    }
    case FeatureKind::kContinuous:
      break;
  }
  const double scale = meta.std_dev > 0.0 ? meta.std_dev : fallback_step(v);
  if (mode == PerturbMode::kDeterministic) return v + sign * scale;
  if (!rng) throw ContractError("stochastic perturbation needs a random generator");
  return v + sign * std::abs(scale * standard_normal(*rng));
}

// ---------------------------------------------------------------------------
// Evidence.
// ---------------------------------------------------------------------------

struct AlterationRecord {
  Alt alt = Alt::kIncreasing;
  double altered_value = 0.0;
  Exp expected = Exp::kRemainingStable;
  Exp observed = Exp::kRemainingStable;
  double probability_before = 0.0;
  double probability_after = 0.0;

  bool matched() const { return expected == observed; }
};

struct FeatureEvidence {
  std::size_t feature = 0;
  std::string name;
  double importance = 0.0;
  double original_value = 0.0;
  Imp imp = Imp::kNeutral;
  // [0] Increasing, [1] Decreasing.
  std::array<AlterationRecord, 2> records{};

  bool truthful() const { return records[0].matched() && records[1].matched(); }
  const AlterationRecord& record(Alt alt) const { return records[alt == Alt::kIncreasing ? 0 : 1]; }
};

struct TruthReport {
  std::string technique_id;
  std::size_t num_features = 0;
  std::vector<std::string> feature_names{};
  double baseline_probability = 0.0;
  double delta = 0.0;
  // One entry per tested feature, ascending feature index.
  std::vector<FeatureEvidence> evidence{};
  std::vector<std::size_t> truthful{};
  std::vector<std::size_t> untruthful{};
  std::vector<std::string> warnings{};

  const FeatureEvidence* find(std::size_t feature) const {
    for (const auto& e : evidence) {
      if (e.feature == feature) return &e;
    }
    return nullptr;
  }

  // Rebuilds truthful/untruthful from the evidence records.
  void classify() {
    truthful.clear();
    untruthful.clear();
    for (const auto& e : evidence) (e.truthful() ? truthful : untruthful).push_back(e.feature);
  }
};

enum class StatsSource {
  kTraining,  // dataset std_dev
  kLocal      // neighbourhood std recorded by a sampling technique
};

struct InvestigatorOptions {
  double delta = 0.01;
  PerturbMode mode = PerturbMode::kDeterministic;
  // Draws per alteration in stochastic mode; the observed label is the
  // majority over the draws.
  std::size_t stochastic_repeats = 5;
  std::uint64_t seed = 0;
  StatsSource stats = StatsSource::kTraining;
  // |z_j| <= relative * max|z| (or the absolute band, when set) is Neutral.
  double neutral_band_relative = 1e-6;
  std::optional<double> neutral_band_absolute{};
};

inline double neutral_band(const ImportanceVector& z, const InvestigatorOptions& opts) {
  if (opts.neutral_band_absolute) return *opts.neutral_band_absolute;
  double max_abs = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!z.is_excluded(j)) max_abs = std::max(max_abs, std::abs(z.values[j]));
  }
  return opts.neutral_band_relative * max_abs;
}

namespace internal {

inline std::size_t alt_index(Alt alt) { return alt == Alt::kIncreasing ? 0 : 1; }

}  // namespace internal

// Runs the two alteration tests on every non-excluded feature. In
// deterministic mode this costs exactly 1 + 2 * (tested features) queries.
inline TruthReport investigate(const Predictor& m, const ImportanceVector& z, const Instance& x,
                               const Dataset& ds, const InvestigatorOptions& opts = {}) {
  const std::size_t f = x.size();
  if (z.size() != f || m.arity() != f || ds.num_features() != f) {
    throw ContractError("model, importance vector, instance and dataset arity disagree");
  }
  if (!(opts.delta >= 0.0)) throw ContractError("delta must be non-negative");
  if (opts.mode == PerturbMode::kStochastic && opts.stochastic_repeats < 1) {
    throw ContractError("stochastic mode needs at least one repeat");
  }

  TruthReport report;
  report.technique_id = z.technique_id;
  report.num_features = f;
  report.feature_names = ds.feature_names();
  report.delta = opts.delta;

  const bool local = opts.stats == StatsSource::kLocal && z.neighborhood_std &&
                     z.neighborhood_std->size() == f;
  if (opts.stats == StatsSource::kLocal && !local) {
    report.warnings.push_back("no neighbourhood statistics for '" + z.technique_id +
                              "'; using training-set spread");
  }

  const double band = neutral_band(z, opts);
  const double before = m.predict_proba(x);
  report.baseline_probability = before;

  for (std::size_t j = 0; j < f; ++j) {
    if (z.is_excluded(j)) continue;
    FeatureMeta meta = ds.feature(j);
    if (local) meta.std_dev = (*z.neighborhood_std)[j];

    FeatureEvidence ev;
    ev.feature = j;
    ev.name = meta.name;
    ev.importance = z.values[j];
    ev.original_value = x[j];
    ev.imp = classify_importance(z.values[j], band);
    for (Alt alt : kAlterations) {
      AlterationRecord& rec = ev.records[internal::alt_index(alt)];
      rec.alt = alt;
      rec.expected = expected_direction(ev.imp, alt);
      rec.probability_before = before;
      if (opts.mode == PerturbMode::kDeterministic) {
        rec.altered_value = perturb(meta, x[j], alt);
        rec.probability_after = m.predict_proba(x.with(j, rec.altered_value));
        rec.observed = classify_direction(before, rec.probability_after, opts.delta);
        continue;
      }
      Rng rng(derive_seed(opts.seed, "investigate", {j, internal::alt_index(alt)}));
      std::array<std::size_t, 3> votes{};
      std::vector<std::pair<double, double>> draws;
      std::vector<Exp> labels;
      for (std::size_t k = 0; k < opts.stochastic_repeats; ++k) {
        const double value = perturb(meta, x[j], alt, PerturbMode::kStochastic, &rng);
        const double p = m.predict_proba(x.with(j, value));
        const Exp label = classify_direction(before, p, opts.delta);
        ++votes[static_cast<std::size_t>(label)];
        draws.emplace_back(value, p);
        labels.push_back(label);
      }
      // Majority label; ties go to whichever tied label was drawn first.
      const std::size_t best = *std::max_element(votes.begin(), votes.end());
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (votes[static_cast<std::size_t>(labels[k])] == best) {
          rec.observed = labels[k];
          rec.altered_value = draws[k].first;
          rec.probability_after = draws[k].second;
          break;
        }
      }
    }
    report.evidence.push_back(std::move(ev));
  }
  report.classify();
  return report;
}

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const TruthReport& r) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& e : r.evidence) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& rec : e.records) {
      tests.push_back({{"alteration", to_string(rec.alt)},
                       {"altered_value", rec.altered_value},
                       {"expected", to_string(rec.expected)},
                       {"observed", to_string(rec.observed)},
                       {"probability_before", rec.probability_before},
                       {"probability_after", rec.probability_after},
                       {"matched", rec.matched()}});
    }
    features.push_back({{"index", e.feature},
                        {"name", e.name},
                        {"importance", e.importance},
                        {"value", e.original_value},
                        {"imp", to_string(e.imp)},
                        {"truthful", e.truthful()},
                        {"tests", tests}});
  }
  nlohmann::json j{{"technique", r.technique_id},
                   {"num_features", r.num_features},
                   {"feature_names", r.feature_names},
                   {"baseline", r.baseline_probability},
                   {"delta", r.delta},
                   {"features", features},
                   {"truthful", r.truthful},
                   {"untruthful", r.untruthful}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

inline TruthReport truth_report_from_json(const nlohmann::json& j) {
  try {
    TruthReport r;
    r.technique_id = j.at("technique").get<std::string>();
    r.num_features = j.at("num_features").get<std::size_t>();
    r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    r.baseline_probability = j.at("baseline").get<double>();
    r.delta = j.at("delta").get<double>();
    for (const auto& fj : j.at("features")) {
      FeatureEvidence e;
      e.feature = fj.at("index").get<std::size_t>();
      e.name = fj.at("name").get<std::string>();
      e.importance = fj.at("importance").get<double>();
      e.original_value = fj.at("value").get<double>();
      e.imp = imp_from_string(fj.at("imp").get<std::string>());
      const auto& tests = fj.at("tests");
      if (tests.size() != 2) throw LoadError("each feature needs exactly two tests");
      for (std::size_t k = 0; k < 2; ++k) {
        auto& rec = e.records[k];
        rec.alt = alt_from_string(tests[k].at("alteration").get<std::string>());
        rec.altered_value = tests[k].at("altered_value").get<double>();
        rec.expected = exp_from_string(tests[k].at("expected").get<std::string>());
        rec.observed = exp_from_string(tests[k].at("observed").get<std::string>());
        rec.probability_before = tests[k].at("probability_before").get<double>();
        rec.probability_after = tests[k].at("probability_after").get<double>();
      }
      r.evidence.push_back(std::move(e));
    }
    r.classify();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed truth report: ") + e.what());
  }
}

}  // namespace truthcheck
