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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/scenarios.hpp"
#include "truthcheck.hpp"

namespace tc = truthcheck;
namespace tt = truthcheck::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

tc::Dataset RandomData(std::size_t f, std::size_t n, std::uint64_t seed) {
  tc::Rng rng(seed);
  std::vector<tc::FeatureSpec> specs;
  for (std::size_t j = 0; j < f; ++j) specs.push_back({"x" + std::to_string(j + 1), tc::FeatureKind::kContinuous, {}});
  std::vector<std::vector<double>> rows(n, std::vector<double>(f));
  for (auto& r : rows) {
    for (double& v : r) v = tc::standard_normal(rng);
  }
  return tc::Dataset(specs, rows);
}

std::shared_ptr<tc::MlpModel> RandomMlp(std::size_t f, std::size_t hidden, tc::Rng& rng) {
  tc::DenseLayer h{Eigen::MatrixXd(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(f)),
                   Eigen::VectorXd(static_cast<Eigen::Index>(hidden))};
  for (Eigen::Index i = 0; i < h.weights.size(); ++i) h.weights.data()[i] = tc::standard_normal(rng);
  for (Eigen::Index i = 0; i < h.bias.size(); ++i) h.bias(i) = tc::standard_normal(rng);
  tc::DenseLayer o{Eigen::MatrixXd(1, static_cast<Eigen::Index>(hidden)), Eigen::VectorXd(1)};
  for (Eigen::Index i = 0; i < o.weights.size(); ++i) o.weights.data()[i] = tc::standard_normal(rng);
  o.bias(0) = 0.2 * tc::standard_normal(rng);
  return std::make_shared<tc::MlpModel>(std::vector<tc::DenseLayer>{h, o});
}

// 1. mark/judge against the exhaustive labelling oracle.
Outcome JudgeOracleEquivalence() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1);
  std::size_t trees = 0, mismatches = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) % 25;
    const auto shape = trial % 2 ? tt::random_tree(n, gen) : tt::deep_random_tree(n, 3, gen);
    const auto tree = tc::mark(tt::TreeFromShape(shape));
    const auto oracle = tt::enumerate_labellings(shape);
    bool ok = oracle.consistent == 1;
    for (std::size_t i = 0; i < n && ok; ++i) {
      ok = (*tree.node(i).mark == tc::Mark::kUndefeated) == (((oracle.labelling >> i) & 1u) != 0);
    }
    ok = ok && (tc::judge(tree) == tc::Judgement::kWarranted) == ((oracle.labelling & 1u) != 0);
    mismatches += !ok;
    ++trees;
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && secs < 5.0,
          Format("%zu trees of 1-25 nodes, %zu mismatches, %.2f s (limit 5 s)", trees, mismatches, secs)};
}

// 2. The verdict is Unwarranted exactly when nothing is untruthful.
Outcome CentralTheorem() {
  std::mt19937_64 gen(2);
  std::size_t reports = 0, violations = 0, clean = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto report = tt::RandomReport(1 + static_cast<std::size_t>(trial) % 10, gen);
    const auto verdict = tc::judge(tc::mark(tc::build_tree(report)));
    violations += (verdict == tc::Judgement::kUnwarranted) != report.untruthful.empty();
    clean += report.untruthful.empty();
    ++reports;
  }
  return {violations == 0 && clean > 0 && clean < reports,
          Format("%zu reports with |F| in 1..10 (%zu fully truthful), %zu violations", reports, clean, violations)};
}

// 3. Logistic regression explained by its own coefficients.
Outcome LogisticIntrinsic() {
  const auto start = Clock::now();
  std::size_t tested = 0, untruthful = 0, unresolvable = 0;
  auto audit = [&](const tc::Dataset& ds, const tc::LinearModel& m) {
    for (std::size_t i = 0; i < ds.num_rows(); ++i) {
      const tc::Instance x = ds.instance(i);
      const auto report = tc::investigate(m, tc::intrinsic_linear(m, x), x, ds);
      const double l = m.logit(x.span());
      for (const auto& e : report.evidence) {
        const double w = std::abs(m.weights()[e.feature]);
        const double step = ds.feature(e.feature).std_dev;
        const double change = std::min(tc::sigmoid(l + w * step) - tc::sigmoid(l), tc::sigmoid(l) - tc::sigmoid(l - w * step));
        if (e.imp != tc::Imp::kNeutral && !(change > report.delta + 1e-12)) {
          ++unresolvable;
          continue;
        }
        ++tested;
        untruthful += !e.truthful();
      }
    }
  };
  const tc::Dataset bank = tc::load_dataset_file(TRUTHCHECK_DATA_DIR "/banknote.csv",
                                                 tc::load_schema(TRUTHCHECK_DATA_DIR "/banknote.schema"));
  audit(bank, tc::train_logistic(bank));
  tc::Rng rng(3);
  for (int task = 0; task < 20; ++task) {
    const std::size_t f = 2 + static_cast<std::size_t>(task) % 7;
    tc::Dataset raw = RandomData(f, 300, 300 + task);
    std::vector<double> w(f);
    for (double& v : w) v = tc::standard_normal(rng);
    if (task % 4 == 0) w[f - 1] = 0.0;
    std::vector<int> labels;
    for (std::size_t i = 0; i < raw.num_rows(); ++i) {
      double logit = 0.0;
      for (std::size_t j = 0; j < f; ++j) logit += w[j] * raw.row(i)[j];
      labels.push_back(tc::uniform01(rng) < tc::sigmoid(logit) ? 1 : 0);
    }
    const tc::Dataset ds(raw.specs(), raw.rows(), labels);
    audit(ds, tc::train_logistic(ds));
  }
  const double secs = Seconds(start);
  const double pct = tested ? 100.0 * static_cast<double>(untruthful) / static_cast<double>(tested) : 100.0;
  return {untruthful == 0 && tested > 0 && secs < 30.0,
          Format("banknote + 20 synthetic tasks: %.2f%% untruthful over %zu resolvable or neutral importances "
                 "(%zu below the delta resolution skipped), %.2f s (limit 30 s)",
                 pct, tested, unresolvable, secs)};
}

// 4. One feature: raising it lifts the probability, lowering it does nothing.
Outcome RunningExample() {
  const auto s = tt::RunningExample();
  const auto r = tc::evaluate_instance(*s.model, {}, s.x, s.data, {}, {s.z});
  const auto& report = r.reports[0];
  std::vector<std::string> want{
      "The explanation is untrusted",
      "The explanation is trusted",
      "The importance of f1 is untruthful",
      "The importance of f1 is truthful since it has a Positive influence, and when its value is Increasing "
      "locally, we observe that the probability is Increasing, and when its value is Decreasing locally, we "
      "observe that the probability is Decreasing",
      "f1 has a Positive influence and is therefore expected the probability to be Increased by Increasing its "
      "value. f1 has a Positive influence and is therefore expected the probability to be Decreased by "
      "Decreasing its value",
      "f1's value got Increased and evaluated and the probability is Increased as expected",
      "f1's value got Decreased and evaluated and the probability is Remaining Stable, while it was expected to "
      "be Decreased"};
  bool texts = r.dialogue.size() == want.size();
  for (std::size_t i = 0; texts && i < want.size(); ++i) texts = r.dialogue[i].text == want[i];
  const bool ok = report.untruthful == std::vector<std::size_t>{0} &&
                  r.initial_judgements[0] == tc::Judgement::kWarranted &&
                  r.final_judgement == tc::Judgement::kUnwarranted && texts;
  return {ok, Format("feature 1 untruthful: %s; before reduction %s, after %s; %zu/%zu dialogue turns verbatim",
                     report.untruthful.size() == 1 ? "yes" : "no", tc::to_string(r.initial_judgements[0]),
                     tc::to_string(r.final_judgement), texts ? want.size() : std::size_t{0}, want.size())};
}

// 5. Entropy reacting against its positive importance.
Outcome EntropyExample() {
  const auto s = tt::EntropyCase();
  const auto report = tc::investigate(*s.model, s.z, s.x, s.data);
  const auto turns = tc::render_dialogue(tc::mark(tc::build_tree(report)), report);
  const auto* e = report.find(3);
  const std::string f_inc =
      "entropy's value got Increased and evaluated and the probability is Decreased, while it was expected to be "
      "Increased";
  const std::string f_dec =
      "entropy's value got Decreased and evaluated and the probability is Increased, while it was expected to be "
      "Decreased";
  const bool ok = e && report.untruthful == std::vector<std::size_t>{3} &&
                  std::abs(e->record(tc::Alt::kIncreasing).altered_value - 1.642) < 1e-3 &&
                  std::abs(e->record(tc::Alt::kDecreasing).altered_value + 2.531) < 1e-3 &&
                  e->record(tc::Alt::kIncreasing).probability_after == 0.0910 &&
                  e->record(tc::Alt::kDecreasing).probability_after == 0.9817 &&
                  report.baseline_probability == 0.8145 && turns.size() == 7 && turns[5].text == f_inc &&
                  turns[6].text == f_dec;
  return {ok, Format("-0.445 -> %.3f: %.4f -> %.4f (%s); -0.445 -> %.3f: %.4f -> %.4f (%s)",
                     e ? e->record(tc::Alt::kIncreasing).altered_value : 0.0, report.baseline_probability,
                     e ? e->record(tc::Alt::kIncreasing).probability_after : 0.0,
                     e ? tc::to_string(e->record(tc::Alt::kIncreasing).observed) : "?",
                     e ? e->record(tc::Alt::kDecreasing).altered_value : 0.0, report.baseline_probability,
                     e ? e->record(tc::Alt::kDecreasing).probability_after : 0.0,
                     e ? tc::to_string(e->record(tc::Alt::kDecreasing).observed) : "?")};
}

// 6. Three truthful features: the full tree and dialogue.
Outcome JohnExample() {
  const auto s = tt::JohnExample();
  const auto report = tc::investigate(*s.model, s.z, s.x, s.data);
  const auto tree = tc::mark(tc::build_tree(report));
  const auto turns = tc::render_dialogue(tree, report);
  const std::size_t lower = tree.count(tc::ArgumentSchema::kAlpha4) + tree.count(tc::ArgumentSchema::kAlpha5) +
                            tree.count(tc::ArgumentSchema::kAlpha6);
  const bool ok = report.untruthful.empty() && tree.size() == 15 && lower == 3 + 3 + 6 &&
                  tree.count(tc::ArgumentSchema::kAlpha6) == 6 && tc::judge(tree) == tc::Judgement::kUnwarranted &&
                  turns.size() == 15 && report.baseline_probability == 0.25;
  return {ok, Format("%zu arguments (%zu below alpha3), verdict %s, %zu turns", tree.size(), lower,
                     tc::to_string(tc::judge(tree)), turns.size())};
}

// 7. The ensemble column never exceeds a technique column.
Outcome EnsembleDominance() {
  const auto start = Clock::now();
  const tc::Dataset bank = tc::load_dataset_file(TRUTHCHECK_DATA_DIR "/banknote.csv",
                                                 tc::load_schema(TRUTHCHECK_DATA_DIR "/banknote.schema"));
  tc::TrainOptions opts;
  const std::vector<std::size_t> small{8}, deep{16, 8};
  std::vector<tc::BenchmarkModel> models{{"logistic", std::make_shared<tc::LinearModel>(tc::train_logistic(bank, opts))},
                                         {"mlp-8", std::make_shared<tc::MlpModel>(tc::train_mlp(bank, small, opts))},
                                         {"mlp-16-8", std::make_shared<tc::MlpModel>(tc::train_mlp(bank, deep, opts))}};
  std::size_t rows = 0, violations = 0, runs = 0;
  for (std::uint64_t seed : {11, 12}) {
    tc::BenchmarkOptions bo;
    bo.sample_size = 60;
    tc::EvaluationConfig cfg;
    cfg.seed = seed;
    const auto summary = tc::run_benchmark(models, bank, bo, cfg);
    ++runs;
    for (const auto& row : summary.rows) {
      ++rows;
      for (const auto& p : row.percentages) violations += p && row.ensemble > *p;
    }
  }
  const double secs = Seconds(start);
  return {violations == 0 && secs < 120.0,
          Format("%zu runs x 3 models x 4 techniques x 60 instances: %zu rows, %zu violations, %.1f s (limit 120 s)",
                 runs, rows, violations, secs)};
}

// 8. Deterministic investigation costs 2|F| + 1 queries.
Outcome QueryBudget() {
  tc::Rng rng(8);
  std::size_t configs = 0, off = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t f = 1 + static_cast<std::size_t>(trial) % 10;
    std::vector<tc::FeatureSpec> specs;
    std::vector<std::vector<double>> rows(40, std::vector<double>(f));
    for (std::size_t j = 0; j < f; ++j) {
      const int kind = static_cast<int>(tc::uniform_index(rng, 3));
      specs.push_back({"x" + std::to_string(j), kind == 0   ? tc::FeatureKind::kContinuous
                                                : kind == 1 ? tc::FeatureKind::kBinaryOneHot
                                                            : tc::FeatureKind::kOrdinal,
                       kind == 2 ? std::vector<double>{1, 2, 3, 4} : std::vector<double>{}});
      for (auto& r : rows) {
        r[j] = kind == 0 ? tc::standard_normal(rng)
               : kind == 1 ? static_cast<double>(tc::uniform_index(rng, 2))
                           : static_cast<double>(1 + tc::uniform_index(rng, 4));
      }
    }
    const tc::Dataset ds(specs, rows);
    std::shared_ptr<tc::Predictor> m;
    if (trial % 2) {
      m = RandomMlp(f, 5, rng);
    } else {
      std::vector<double> w(f);
      for (double& v : w) v = tc::standard_normal(rng);
      m = std::make_shared<tc::LinearModel>(w, 0.0);
    }
    const tc::Instance x = ds.instance(tc::uniform_index(rng, ds.num_rows()));
    tc::ImportanceVector z{tc::kLime, std::vector<double>(f), x, 0.0};
    for (double& v : z.values) v = tc::uniform_index(rng, 4) == 0 ? 0.0 : tc::standard_normal(rng);
    m->reset_query_count();
    tc::investigate(*m, z, x, ds);
    off += m->query_count() != 2 * f + 1;
    ++configs;
  }
  return {off == 0, Format("%zu configurations (|F| 1..10, mixed feature kinds), %zu off budget", configs, off)};
}

// 9. Exhaustive kernel SHAP equals brute-force Shapley values.
Outcome ShapExhaustive() {
  tc::Rng rng(9);
  double worst = 0.0;
  std::size_t models = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t f = 1 + static_cast<std::size_t>(trial) % 4;
    const tc::Dataset ds = RandomData(f, 50, 900 + trial);
    const auto m = RandomMlp(f, 4, rng);
    const tc::Instance x = ds.instance(static_cast<std::size_t>(trial));
    const auto z = tc::kernel_shap_like(*m, ds, x);
    const auto oracle = tt::brute_force_shapley(f, [&](std::uint32_t s) {
      std::vector<double> probe(f);
      for (std::size_t j = 0; j < f; ++j) probe[j] = (s >> j) & 1u ? x[j] : ds.feature(j).mean;
      return m->predict_proba(probe);
    });
    for (std::size_t j = 0; j < f; ++j) worst = std::max(worst, std::abs(z.values[j] - oracle[j]));
    ++models;
  }
  return {worst <= 1e-6, Format("%zu random networks with |F| 1..4, max deviation %.2e (limit 1e-6)", models, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"judge matches exhaustive labelling oracle", JudgeOracleEquivalence},
      {"unwarranted iff no untruthful feature", CentralTheorem},
      {"logistic regression intrinsic importances truthful", LogisticIntrinsic},
      {"running example (0.7 -> 0.85 / stable)", RunningExample},
      {"entropy example (81.45% -> 9.10% / 98.17%)", EntropyExample},
      {"John example tree and dialogue", JohnExample},
      {"ensemble column dominance", EnsembleDominance},
      {"query budget 2|F| + 1", QueryBudget},
      {"exhaustive kernel SHAP equals Shapley values", ShapExhaustive},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("%s [%zu] %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed ? 1 : 0;
}
