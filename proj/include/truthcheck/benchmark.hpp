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
#include <cstdio>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/investigator.hpp"
#include "truthcheck/models.hpp"
#include "truthcheck/rng.hpp"
#include "truthcheck/selector.hpp"

namespace truthcheck {

struct BenchmarkModel {
  std::string name;
  std::shared_ptr<const Predictor> model;
};

struct BenchmarkOptions {
  std::vector<std::string> techniques{kLime, kKernelShap, kPermutation, kIntrinsic};
  std::size_t sample_size = 50;
  // Techniques left out of the ensemble column (e.g. "intrinsic").
  std::set<std::string> ensemble_exclude;
  // 0 = hardware concurrency.
  std::size_t threads = 0;
};

struct BenchmarkRow {
  std::string model;
  // Mean untruthful percentage per technique, aligned with
  // BenchmarkSummary::techniques; empty when the technique does not apply.
  std::vector<std::optional<double>> percentages{};
  double ensemble = 0.0;
  // [technique][instance] untruthful counts.
  std::vector<std::vector<std::optional<std::size_t>>> counts{};
};

struct BenchmarkSummary {
  std::vector<std::string> techniques{};
  std::vector<BenchmarkRow> rows{};
  std::vector<std::size_t> instances{};
  std::size_t num_features = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
};

inline bool technique_applies(const std::string& technique, const Predictor& m) {
  return technique != kIntrinsic || dynamic_cast<const LinearModel*>(&m) != nullptr;
}

// Rows sampled without replacement from a seed derived from cfg.seed.
inline std::vector<std::size_t> sample_instances(const Dataset& ds, std::size_t sample_size, std::uint64_t seed) {
  if (sample_size == 0) throw ContractError("benchmark needs at least one instance");
  std::vector<std::size_t> idx(ds.num_rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "sample"));
  shuffle(idx, rng);
  idx.resize(std::min(sample_size, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Untruthful count of one technique for one instance, using the same class
// view and seeds as evaluate_instance.
inline std::size_t untruthful_count(const std::string& technique, const Predictor& m, const Dataset& ds,
                                    const Instance& x, const EvaluationConfig& cfg, std::uint64_t instance_key,
                                    std::size_t technique_slot) {
  bool negative = cfg.class_target == ClassTarget::kNegative;
  if (cfg.class_target == ClassTarget::kPredicted) negative = m.predict_proba(x) < 0.5;
  const ComplementPredictor complement(m);
  const Predictor& view = negative ? static_cast<const Predictor&>(complement) : m;
  std::optional<Dataset> flipped{};
  if (negative && technique == kPermutation) flipped.emplace(ds.with_flipped_labels());
  const ImportanceVector z = run_technique(technique, view, flipped ? *flipped : ds, x, cfg, instance_key);
  InvestigatorOptions o = cfg.investigator;
  o.seed = derive_seed(cfg.seed, "investigate", {instance_key, technique_slot});
  return investigate(view, z, x, ds, o).untruthful.size();
}

// Mean percentage of untruthful importances per (model, technique), plus an
// ensemble column holding, per instance, the best technique's percentage.
inline BenchmarkSummary run_benchmark(const std::vector<BenchmarkModel>& models, const Dataset& ds,
                                      const BenchmarkOptions& opts, const EvaluationConfig& cfg = {}) {
  if (models.empty()) throw ContractError("benchmark needs at least one model");
  if (opts.techniques.empty()) throw ContractError("benchmark needs at least one technique");
  for (const auto& t : opts.techniques) {
    if (!is_known_technique(t)) throw UsageError("unknown technique '" + t + "'");
  }
  BenchmarkSummary summary;
  summary.techniques = opts.techniques;
  summary.instances = sample_instances(ds, opts.sample_size, cfg.seed);
  summary.num_features = ds.num_features();
  summary.seed = cfg.seed;
  summary.delta = cfg.investigator.delta;

  const std::size_t n = summary.instances.size();
  const std::size_t nt = opts.techniques.size();
  const double f = static_cast<double>(ds.num_features());
  std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);

  for (const auto& bm : models) {
    if (bm.model->arity() != ds.num_features()) {
      throw ContractError("model '" + bm.name + "' arity does not match the dataset");
    }
    BenchmarkRow row;
    row.model = bm.name;
    row.counts.assign(nt, std::vector<std::optional<std::size_t>>(n));

    auto work = [&](std::size_t worker) {
      for (std::size_t i = worker; i < n; i += threads) {
        const std::size_t idx = summary.instances[i];
        const Instance x = ds.instance(idx);
        for (std::size_t t = 0; t < nt; ++t) {
          if (!technique_applies(opts.techniques[t], *bm.model)) continue;
          row.counts[t][i] = untruthful_count(opts.techniques[t], *bm.model, ds, x, cfg, idx, t);
        }
      }
    };
    // Each worker writes disjoint instance slots; results do not depend on
    // scheduling.
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& th : pool) th.join();

    row.percentages.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      if (!row.counts[t][0]) continue;
      double total = 0.0;
      for (const auto& c : row.counts[t]) total += static_cast<double>(*c) / f * 100.0;
      row.percentages[t] = total / static_cast<double>(n);
    }
    double ensemble_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<std::size_t> best;
      for (std::size_t t = 0; t < nt; ++t) {
        if (!row.counts[t][i] || opts.ensemble_exclude.count(opts.techniques[t])) continue;
        best = best ? std::min(*best, *row.counts[t][i]) : *row.counts[t][i];
      }
      if (!best) throw ContractError("ensemble pool is empty for model '" + bm.name + "'");
      ensemble_total += static_cast<double>(*best) / f * 100.0;
    }
    row.ensemble = ensemble_total / static_cast<double>(n);
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

inline std::string format_percentage(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", v);
  return buf;
}

inline std::string format_benchmark_table(const BenchmarkSummary& s) {
  std::size_t name_width = 5;
  for (const auto& r : s.rows) name_width = std::max(name_width, r.model.size());
  auto pad = [](std::string v, std::size_t w) {
    if (v.size() < w) v.insert(0, w - v.size(), ' ');
    return v;
  };
  std::string out = std::string("model") + std::string(name_width - 5, ' ');
  for (const auto& t : s.techniques) out += " | " + pad(t, 11);
  out += " | " + pad("ensemble", 11) + "\n";
  for (const auto& r : s.rows) {
    out += r.model + std::string(name_width - r.model.size(), ' ');
    for (const auto& p : r.percentages) out += " | " + pad(p ? format_percentage(*p) : "-", 11);
    out += " | " + pad(format_percentage(r.ensemble), 11) + "\n";
  }
  char footer[128];
  std::snprintf(footer, sizeof(footer), "instances: %zu, features: %zu, seed: %llu, delta: %g\n",
                s.instances.size(), s.num_features, static_cast<unsigned long long>(s.seed), s.delta);
  return out + footer;
}

inline nlohmann::json to_json(const BenchmarkSummary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    nlohmann::json pct = nlohmann::json::object();
    for (std::size_t t = 0; t < s.techniques.size(); ++t) {
      pct[s.techniques[t]] = r.percentages[t] ? nlohmann::json(*r.percentages[t]) : nlohmann::json(nullptr);
    }
    rows.push_back({{"model", r.model}, {"percentages", pct}, {"ensemble", r.ensemble}});
  }
  return {{"techniques", s.techniques},
          {"rows", rows},
          {"instance_count", s.instances.size()},
          {"instances", s.instances},
          {"num_features", s.num_features},
          {"seed", s.seed},
          {"delta", s.delta}};
}

}  // namespace truthcheck
