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
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/models.hpp"
#include "truthcheck/rng.hpp"

namespace truthcheck {

// Technique identifiers used throughout reports, priorities and the CLI.
inline constexpr const char* kIntrinsic = "intrinsic";
inline constexpr const char* kPermutation = "permutation";
inline constexpr const char* kLime = "lime";
inline constexpr const char* kKernelShap = "shap";

// Signed per-feature importances Z produced by one technique for one instance.
struct ImportanceVector {
  std::string technique_id;
  std::vector<double> values{};
  Instance target_instance;
  // predict_proba at target_instance, recorded when the vector was created.
  double baseline_probability = 0.0;
  // Set by the selector when an entry is dropped from the interpretation.
  std::vector<bool> excluded{};
  // Per-feature spread of the neighbourhood a sampling technique generated.
  std::optional<std::vector<double>> neighborhood_std{};
  std::vector<std::string> warnings{};

  std::size_t size() const { return values.size(); }
  bool is_excluded(std::size_t j) const { return j < excluded.size() && excluded[j]; }
};

// Step used when a continuous feature has no spread to scale by.
inline double fallback_step(double v) { return std::max(std::abs(v), 1.0) * 0.1; }

inline double feature_scale(const FeatureMeta& meta, double v) {
  return meta.std_dev > 0.0 ? meta.std_dev : fallback_step(v);
}

// ---------------------------------------------------------------------------
// Intrinsic linear importance.
// ---------------------------------------------------------------------------

enum class IntrinsicForm {
  kCoefficient,  // z_j = w_j
  kContribution  // z_j = w_j * v_j
};

inline ImportanceVector intrinsic_linear(const LinearModel& m, const Instance& x,
                                         IntrinsicForm form = IntrinsicForm::kCoefficient) {
  if (x.size() != m.arity()) throw ContractError("instance arity does not match the model");
  ImportanceVector out{kIntrinsic, m.weights(), x, m.predict_proba(x)};
  if (form == IntrinsicForm::kContribution) {
    for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] *= x[j];
  }
  return out;
}

// Accepts a LinearModel or the complement of one (negative-class view).
inline ImportanceVector intrinsic_linear(const Predictor& m, const Instance& x,
                                         IntrinsicForm form = IntrinsicForm::kCoefficient) {
  if (const auto* lin = dynamic_cast<const LinearModel*>(&m)) return intrinsic_linear(*lin, x, form);
  if (const auto* comp = dynamic_cast<const ComplementPredictor*>(&m)) {
    if (const auto* lin = dynamic_cast<const LinearModel*>(&comp->base())) {
      ImportanceVector out = intrinsic_linear(lin->negated(), x, form);
      out.baseline_probability = m.predict_proba(x);
      return out;
    }
  }
  throw UnsupportedError("intrinsic importance needs a linear model, got '" + m.kind() + "'");
}

// ---------------------------------------------------------------------------
// Permutation importance with a locally attached sign.
// ---------------------------------------------------------------------------

struct PermutationOptions {
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
};

namespace internal {

inline double clipped_log_loss(double p, int y) {
  constexpr double kEps = 1e-15;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace internal

// Mean increase of the model's log-loss on ds when column j is shuffled.
// Unlabelled datasets are scored against the model's own hard predictions.
inline std::vector<double> permutation_scores(const Predictor& m, const Dataset& ds,
                                              const PermutationOptions& opts) {
  if (opts.repeats < 1) throw ContractError("permutation importance needs repeats >= 1");
  if (ds.num_rows() == 0) throw ContractError("permutation importance needs data");
  if (ds.num_features() != m.arity()) throw ContractError("dataset arity does not match the model");
  const std::size_t n = ds.num_rows();
  const std::size_t f = ds.num_features();

  std::vector<int> labels(n);
  double base_loss = 0.0;
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = m.predict_proba(ds.row(i));
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = ds.labels() ? (*ds.labels())[i] : (probs[i] >= 0.5 ? 1 : 0);
    base_loss += internal::clipped_log_loss(probs[i], labels[i]);
  }
  base_loss /= static_cast<double>(n);

  std::vector<double> scores(f, 0.0);
  std::vector<double> buffer(f);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < f; ++j) {
    for (std::size_t r = 0; r < opts.repeats; ++r) {
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      Rng rng(derive_seed(opts.seed, "permutation", {j, r}));
      shuffle(perm, rng);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto src = ds.row(i);
        std::copy(src.begin(), src.end(), buffer.begin());
        buffer[j] = ds.row(perm[i])[j];
        loss += internal::clipped_log_loss(m.predict_proba(buffer), labels[i]);
      }
      scores[j] += loss / static_cast<double>(n) - base_loss;
    }
    scores[j] /= static_cast<double>(opts.repeats);
  }
  return scores;
}

// Global permutation magnitude, signed by the central finite difference of
// predict_proba at x with a one-standard-deviation step.
inline ImportanceVector permutation_importance(const Predictor& m, const Dataset& ds,
                                               const Instance& x,
                                               const PermutationOptions& opts = {}) {
  if (x.size() != m.arity()) throw ContractError("instance arity does not match the model");
  const auto scores = permutation_scores(m, ds, opts);
  ImportanceVector out{kPermutation, std::vector<double>(x.size()), x, m.predict_proba(x)};
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = feature_scale(ds.feature(j), x[j]);
    const double slope = m.predict_proba(x.with(j, x[j] + h)) - m.predict_proba(x.with(j, x[j] - h));
    out.values[j] = internal::sign_of(slope) * std::abs(scores[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LIME-style local surrogate.
// ---------------------------------------------------------------------------

enum class LocalStatistic {
  kNeighborStd,       // plain std of the generated neighbours
  kKernelWeightedStd  // std weighted by the proximity kernel
};

struct LimeOptions {
  std::size_t n_samples = 1000;
  // <= 0 selects 0.75 * sqrt(|F|).
  double kernel_width = 0.0;
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 0;
  LocalStatistic local_statistic = LocalStatistic::kNeighborStd;
};

inline double default_kernel_width(std::size_t num_features) {
  return 0.75 * std::sqrt(static_cast<double>(num_features));
}

// Samples neighbours x + eps * s (eps ~ N(0, I), s the per-feature std),
// weights them by exp(-|eps|^2 / width^2) and fits a weighted ridge
// regression of predict_proba on eps. The returned importances are the
// fitted slopes, i.e. the probability change per standard deviation.
inline ImportanceVector lime_like(const Predictor& m, const Dataset& ds, const Instance& x,
                                  const LimeOptions& opts = {}) {
  const std::size_t f = x.size();
  if (f != m.arity() || ds.num_features() != f) {
    throw ContractError("instance, dataset and model arity disagree");
  }
  if (opts.n_samples < f + 1) throw ContractError("lime needs at least |F| + 1 samples");
  const double width = opts.kernel_width > 0.0 ? opts.kernel_width : default_kernel_width(f);
  if (!(width > 0.0)) throw ContractError("kernel width must be positive");

  std::vector<double> scale(f);
  for (std::size_t j = 0; j < f; ++j) scale[j] = feature_scale(ds.feature(j), x[j]);

  const auto n = static_cast<Eigen::Index>(opts.n_samples);
  const auto fi = static_cast<Eigen::Index>(f);
  Eigen::MatrixXd eps(n, fi);
  Eigen::MatrixXd raw(n, fi);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  Rng rng(opts.seed);
  std::vector<double> neighbour(f);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double e = standard_normal(rng);
      eps(i, static_cast<Eigen::Index>(j)) = e;
      neighbour[j] = x[j] + e * scale[j];
      raw(i, static_cast<Eigen::Index>(j)) = neighbour[j];
      d2 += e * e;
    }
    w(i) = std::exp(-d2 / (width * width));
    y(i) = m.predict_proba(neighbour);
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericalError("all neighbour weights vanished; widen the kernel");
  w /= total;

  // Unpenalised intercept: centre on the weighted means, then ridge.
  const Eigen::RowVectorXd mean_eps = w.transpose() * eps;
  const double mean_y = w.dot(y);
  const Eigen::MatrixXd centred = eps.rowwise() - mean_eps;
  const Eigen::VectorXd yc = y.array() - mean_y;
  Eigen::MatrixXd gram = centred.transpose() * w.asDiagonal() * centred;
  gram.diagonal().array() += opts.ridge_lambda;
  const Eigen::VectorXd rhs = centred.transpose() * w.asDiagonal() * yc;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success || !solver.isPositive()) {
    throw NumericalError("weighted design is singular");
  }
  const Eigen::VectorXd beta = solver.solve(rhs);
  if (!beta.allFinite()) throw NumericalError("surrogate fit produced non-finite coefficients");

  ImportanceVector out{kLime, std::vector<double>(beta.data(), beta.data() + beta.size()), x,
                       m.predict_proba(x)};
  std::vector<double> spread(f);
  for (Eigen::Index j = 0; j < fi; ++j) {
    const auto col = raw.col(j);
    if (opts.local_statistic == LocalStatistic::kNeighborStd) {
      const double mu = col.mean();
      spread[static_cast<std::size_t>(j)] =
          std::sqrt((col.array() - mu).square().sum() / static_cast<double>(n));
    } else {
      const double mu = w.dot(col);
      spread[static_cast<std::size_t>(j)] = std::sqrt(w.dot((col.array() - mu).square().matrix()));
    }
  }
  out.neighborhood_std = std::move(spread);
  return out;
}

// ---------------------------------------------------------------------------
// Kernel-SHAP-style attribution against the dataset-mean reference.
// ---------------------------------------------------------------------------

struct ShapOptions {
  // Coalitions to evaluate; when >= 2^|F| - 2 every coalition is enumerated.
  std::size_t n_coalitions = 2048;
  std::uint64_t seed = 0;
};

namespace internal {

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Shapley kernel weight of a coalition of size s among m players.
inline double shapley_kernel(std::size_t m, std::size_t s) {
  return static_cast<double>(m - 1) /
         (binomial(m, s) * static_cast<double>(s) * static_cast<double>(m - s));
}

inline bool exhaustive_fits(std::size_t m, std::size_t budget) {
  return m < 31 && budget + 2 >= (std::size_t{1} << m);
}

}  // namespace internal

// Solves the Shapley-kernel weighted least squares with the efficiency
// constraint sum(phi) = f(x) - f(reference) eliminated exactly. With all
// coalitions enumerated the solution equals the exact Shapley values.
inline ImportanceVector kernel_shap_like(const Predictor& m, const Dataset& ds, const Instance& x,
                                         const ShapOptions& opts = {}) {
  const std::size_t f = x.size();
  if (f != m.arity() || ds.num_features() != f) {
    throw ContractError("instance, dataset and model arity disagree");
  }
  if (opts.n_coalitions < 2 * f) throw ContractError("kernel shap needs at least 2|F| coalitions");

  std::vector<double> reference(f);
  for (std::size_t j = 0; j < f; ++j) reference[j] = ds.feature(j).mean;

  ImportanceVector out{kKernelShap, std::vector<double>(f, 0.0), x, m.predict_proba(x)};
  const double f_ref = m.predict_proba(reference);
  const double delta = out.baseline_probability - f_ref;
  if (f == 1) {
    out.values[0] = delta;
    return out;
  }

  // coalition membership -> accumulated regression weight
  std::map<std::vector<bool>, double> coalitions;
  if (internal::exhaustive_fits(f, opts.n_coalitions)) {
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << f); ++mask) {
      std::vector<bool> member(f);
      std::size_t s = 0;
      for (std::size_t j = 0; j < f; ++j) {
        member[j] = (mask >> j) & 1U;
        s += member[j];
      }
      coalitions[member] = internal::shapley_kernel(f, s);
    }
  } else {
    // Draw sizes in proportion to their total kernel mass, members uniformly,
    // and add each coalition together with its complement.
    std::vector<double> size_mass(f, 0.0);
    double mass = 0.0;
    for (std::size_t s = 1; s < f; ++s) {
      size_mass[s] = static_cast<double>(f - 1) / (static_cast<double>(s) * static_cast<double>(f - s));
      mass += size_mass[s];
    }
    Rng rng(opts.seed);
    std::vector<std::size_t> order(f);
    for (std::size_t draw = 0; draw < opts.n_coalitions / 2; ++draw) {
      double u = uniform01(rng) * mass;
      std::size_t s = 1;
      while (s + 1 < f && u >= size_mass[s]) u -= size_mass[s++];
      for (std::size_t j = 0; j < f; ++j) order[j] = j;
      shuffle(order, rng);
      std::vector<bool> member(f, false);
      for (std::size_t k = 0; k < s; ++k) member[order[k]] = true;
      std::vector<bool> complement(f);
      for (std::size_t j = 0; j < f; ++j) complement[j] = !member[j];
      coalitions[member] += 1.0;
      coalitions[complement] += 1.0;
    }
  }

  // Unknowns phi_1..phi_{M-1}; phi_M = delta - sum of the others.
  const auto k = static_cast<Eigen::Index>(f - 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  std::vector<double> probe(f);
  Eigen::VectorXd row(k);
  for (const auto& [member, weight] : coalitions) {
    for (std::size_t j = 0; j < f; ++j) probe[j] = member[j] ? x[j] : reference[j];
    const double last = member[f - 1] ? 1.0 : 0.0;
    const double target = m.predict_proba(probe) - f_ref - last * delta;
    for (Eigen::Index j = 0; j < k; ++j) row(j) = (member[static_cast<std::size_t>(j)] ? 1.0 : 0.0) - last;
    gram.noalias() += weight * row * row.transpose();
    rhs.noalias() += weight * target * row;
  }

  Eigen::VectorXd phi;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() == k) {
    phi = lu.solve(rhs);
  } else {
    const double lambda = 1e-8 * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
    out.warnings.push_back("coalition design is rank deficient; regularised with lambda=" +
                           std::to_string(lambda));
    gram.diagonal().array() += lambda;
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
      throw NumericalError("coalition design is singular even after regularisation");
    }
    phi = solver.solve(rhs);
  }
  if (!phi.allFinite()) throw NumericalError("shapley solve produced non-finite values");
  double partial = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    out.values[static_cast<std::size_t>(j)] = phi(j);
    partial += phi(j);
  }
  out.values[f - 1] = delta - partial;
  return out;
}

// ---------------------------------------------------------------------------
// JSON: {"technique", "z", "baseline"} plus optional "instance", "excluded".
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ImportanceVector& z) {
  nlohmann::json j{{"technique", z.technique_id},
                   {"z", z.values},
                   {"baseline", z.baseline_probability},
                   {"instance", z.target_instance.values}};
  if (!z.excluded.empty()) j["excluded"] = z.excluded;
  if (z.neighborhood_std) j["neighborhood_std"] = *z.neighborhood_std;
  if (!z.warnings.empty()) j["warnings"] = z.warnings;
  return j;
}

// Imports an externally computed explanation. The instance may come from the
// file or be supplied by the caller; the caller's wins when both are present.
inline ImportanceVector importance_from_json(const nlohmann::json& j,
                                             std::optional<Instance> instance = std::nullopt) {
  if (!j.is_object() || !j.contains("technique") || !j.contains("z") || !j.contains("baseline")) {
    throw LoadError("importance JSON needs 'technique', 'z' and 'baseline'");
  }
  ImportanceVector z;
  try {
    z.technique_id = j.at("technique").get<std::string>();
    z.values = j.at("z").get<std::vector<double>>();
    z.baseline_probability = j.at("baseline").get<double>();
    if (instance) {
      z.target_instance = *instance;
    } else if (j.contains("instance")) {
      z.target_instance.values = j.at("instance").get<std::vector<double>>();
    }
    if (j.contains("excluded")) z.excluded = j.at("excluded").get<std::vector<bool>>();
    if (j.contains("neighborhood_std")) {
      z.neighborhood_std = j.at("neighborhood_std").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed importance JSON: ") + e.what());
  }
  if (!z.target_instance.values.empty() && z.target_instance.size() != z.values.size()) {
    throw LoadError("importance vector and instance lengths differ");
  }
  return z;
}

}  // namespace truthcheck
