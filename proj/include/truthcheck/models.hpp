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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/rng.hpp"

namespace truthcheck {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// A binary probabilistic classifier: maps an instance to the probability of
// the positive class. Every call through predict_proba is counted, so callers
// can audit exactly how many model queries an analysis spent.
class Predictor {
 public:
  explicit Predictor(std::size_t arity) : arity_(arity) {}
  // Copies start with a fresh query counter.
  Predictor(const Predictor& other) : arity_(other.arity_) {}
  Predictor& operator=(const Predictor& other) {
    arity_ = other.arity_;
    return *this;
  }
  virtual ~Predictor() = default;

  double predict_proba(std::span<const double> x) const {
    if (x.size() != arity_) {
      throw ContractError("predictor expects " + std::to_string(arity_) +
                          " features, got " + std::to_string(x.size()));
    }
    queries_.fetch_add(1, std::memory_order_relaxed);
    const double p = evaluate(x);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError("predictor produced " + std::to_string(p) +
                          ", outside [0, 1]");
    }
    return p;
  }
  double predict_proba(const Instance& x) const { return predict_proba(x.span()); }

  std::size_t arity() const { return arity_; }
  std::uint64_t query_count() const { return queries_.load(std::memory_order_relaxed); }
  void reset_query_count() const { queries_.store(0, std::memory_order_relaxed); }

  virtual std::string kind() const = 0;

 protected:
  virtual double evaluate(std::span<const double> x) const = 0;

 private:
  std::size_t arity_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

// sigmoid(w . x + b)
class LinearModel final : public Predictor {
 public:
  LinearModel(std::vector<double> weights, double bias)
      : Predictor(weights.size()), weights_(std::move(weights)), bias_(bias) {
    if (weights_.empty()) throw ContractError("linear model needs at least one weight");
  }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

  double logit(std::span<const double> x) const {
    double z = bias_;
    for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * x[j];
    return z;
  }

  // sigmoid(-z) == 1 - sigmoid(z): the same model seen from the negative class.
  LinearModel negated() const {
    std::vector<double> w = weights_;
    for (double& v : w) v = -v;
    return LinearModel(std::move(w), -bias_);
  }

  std::string kind() const override { return "logistic"; }

 protected:
  double evaluate(std::span<const double> x) const override { return sigmoid(logit(x)); }

 private:
  std::vector<double> weights_;
  double bias_;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Fully connected network: rectifier hidden layers, one sigmoid output unit.
class MlpModel final : public Predictor {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers)
      : Predictor(layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols())),
        layers_(std::move(layers)) {
    if (layers_.empty()) throw ContractError("network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      if (layer.bias.size() != layer.weights.rows()) {
        throw ContractError("layer " + std::to_string(l) + ": bias size does not match rows");
      }
      if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
        throw ContractError("layer " + std::to_string(l) + ": input width " +
                            std::to_string(layer.weights.cols()) + " does not chain with " +
                            std::to_string(layers_[l - 1].weights.rows()));
      }
    }
    if (layers_.back().weights.rows() != 1) {
      throw ContractError("output layer must have exactly one unit");
    }
  }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::string kind() const override { return "mlp"; }

 protected:
  double evaluate(std::span<const double> x) const override {
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::VectorXd h = layers_[l].weights * a + layers_[l].bias;
      if (l + 1 < layers_.size()) {
        a = h.cwiseMax(0.0);
      } else {
        return sigmoid(h(0));
      }
    }
    return 0.5;  // unreachable
  }

 private:
  std::vector<DenseLayer> layers_;
};

// Wraps an arbitrary callable. Used for scripted responses in tests and for
// adapting models that live outside this library.
class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  FunctionPredictor(std::size_t arity, Fn fn, std::string name = "function")
      : Predictor(arity), fn_(std::move(fn)), name_(std::move(name)) {}

  std::string kind() const override { return name_; }

 protected:
  double evaluate(std::span<const double> x) const override { return fn_(x); }

 private:
  Fn fn_;
  std::string name_;
};

// 1 - p of a borrowed predictor: the probability of the negative class.
class ComplementPredictor final : public Predictor {
 public:
  explicit ComplementPredictor(const Predictor& base) : Predictor(base.arity()), base_(&base) {}

  std::string kind() const override { return "complement(" + base_->kind() + ")"; }
  const Predictor& base() const { return *base_; }

 protected:
  double evaluate(std::span<const double> x) const override {
    return 1.0 - base_->predict_proba(x);
  }

 private:
  const Predictor* base_;
};

// ---------------------------------------------------------------------------
// Trainers: deterministic full-batch gradient descent on the mean log-loss,
// run in standardized feature space and folded back to raw units on return.
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::size_t epochs = 500;
  double learning_rate = 0.5;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

namespace internal {

struct TrainingData {
  Eigen::MatrixXd x;  // standardized, N x F
  Eigen::VectorXd y;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

inline TrainingData prepare_training_data(const Dataset& ds, const TrainOptions& opts) {
  if (opts.epochs < 1) throw ContractError("epochs must be at least 1");
  if (!(opts.learning_rate > 0.0)) throw ContractError("learning rate must be positive");
  if (!ds.labels()) throw ContractError("training requires a labelled dataset");
  const auto& labels = *ds.labels();
  for (int y : labels) {
    if (y != 0 && y != 1) throw UnsupportedError("only binary labels {0, 1} are supported");
  }
  const auto n = static_cast<Eigen::Index>(ds.num_rows());
  const auto f = static_cast<Eigen::Index>(ds.num_features());
  TrainingData td{Eigen::MatrixXd(n, f), Eigen::VectorXd(n), Eigen::VectorXd(f), Eigen::VectorXd(f)};
  for (Eigen::Index j = 0; j < f; ++j) {
    const auto& meta = ds.feature(static_cast<std::size_t>(j));
    td.mean(j) = meta.mean;
    td.scale(j) = meta.std_dev > 0.0 ? meta.std_dev : 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = ds.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < f; ++j) td.x(i, j) = (r[j] - td.mean(j)) / td.scale(j);
    td.y(i) = labels[static_cast<std::size_t>(i)];
  }
  return td;
}

inline double mean_log_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& y) {
  // log(1 + e^z) - y z, evaluated stably.
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits(i);
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y(i) * z;
  }
  return total / static_cast<double>(logits.size());
}

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return truthcheck::sigmoid(v); });
}

// Fold x_std = (x - mean) / scale into an affine layer acting on raw inputs.
inline void fold_standardization(DenseLayer& layer, const TrainingData& td) {
  layer.bias -= layer.weights * td.mean.cwiseQuotient(td.scale);
  layer.weights = layer.weights * td.scale.cwiseInverse().asDiagonal();
}

}  // namespace internal

// Records the training loss (mean log-loss, penalty excluded) after every
// epoch when a sink is supplied.
inline LinearModel train_logistic(const Dataset& ds, const TrainOptions& opts = {},
                                  std::vector<double>* loss_history = nullptr) {
  const auto td = internal::prepare_training_data(ds, opts);
  const double n = static_cast<double>(td.x.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(td.x.cols());
  double b = 0.0;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    const Eigen::VectorXd logits = (td.x * w).array() + b;
    const Eigen::VectorXd residual = internal::sigmoid(logits) - td.y;
    const Eigen::VectorXd grad_w = td.x.transpose() * residual / n + opts.l2 * w;
    const double grad_b = residual.sum() / n;
    w -= opts.learning_rate * grad_w;
    b -= opts.learning_rate * grad_b;
    if (loss_history) {
      loss_history->push_back(internal::mean_log_loss((td.x * w).array() + b, td.y));
    }
  }
  DenseLayer layer{w.transpose(), Eigen::VectorXd::Constant(1, b)};
  internal::fold_standardization(layer, td);
  return LinearModel(std::vector<double>(layer.weights.data(), layer.weights.data() + layer.weights.size()),
                     layer.bias(0));
}

// Hidden layers use He-normal initialisation from opts.seed; the output layer
// starts at zero, so an empty hidden list reproduces train_logistic.
inline MlpModel train_mlp(const Dataset& ds, std::span<const std::size_t> hidden,
                          const TrainOptions& opts = {},
                          std::vector<double>* loss_history = nullptr) {
  const auto td = internal::prepare_training_data(ds, opts);
  const double n = static_cast<double>(td.x.rows());
  Rng rng(derive_seed(opts.seed, "mlp-init"));

  std::vector<DenseLayer> layers;
  Eigen::Index width = td.x.cols();
  for (std::size_t units : hidden) {
    if (units == 0) throw ContractError("hidden layers need at least one unit");
    const auto out = static_cast<Eigen::Index>(units);
    DenseLayer layer{Eigen::MatrixXd(out, width), Eigen::VectorXd::Zero(out)};
    const double scale = std::sqrt(2.0 / static_cast<double>(width));
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < width; ++c) layer.weights(r, c) = scale * standard_normal(rng);
    }
    layers.push_back(std::move(layer));
    width = out;
  }
  layers.push_back({Eigen::MatrixXd::Zero(1, width), Eigen::VectorXd::Zero(1)});

  const std::size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> activations(depth + 1);
  std::vector<Eigen::MatrixXd> pre(depth);
  auto forward = [&]() -> Eigen::VectorXd {
    activations[0] = td.x;
    for (std::size_t l = 0; l < depth; ++l) {
      pre[l] = (activations[l] * layers[l].weights.transpose()).rowwise() +
               layers[l].bias.transpose();
      activations[l + 1] = l + 1 < depth ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
    }
    return activations[depth].col(0);
  };

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    const Eigen::VectorXd logits = forward();
    Eigen::MatrixXd delta = (internal::sigmoid(logits) - td.y) / n;  // N x 1
    for (std::size_t l = depth; l-- > 0;) {
      const Eigen::MatrixXd grad_w = delta.transpose() * activations[l] + opts.l2 * layers[l].weights;
      const Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
      if (l > 0) {
        delta = (delta * layers[l].weights).cwiseProduct(
            pre[l - 1].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
      }
      layers[l].weights -= opts.learning_rate * grad_w;
      layers[l].bias -= opts.learning_rate * grad_b;
    }
    if (loss_history) loss_history->push_back(internal::mean_log_loss(forward(), td.y));
  }
  internal::fold_standardization(layers.front(), td);
  return MlpModel(std::move(layers));
}

// ---------------------------------------------------------------------------
// Classification metrics at the 0.5 threshold.
// ---------------------------------------------------------------------------

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline ClassificationMetrics evaluate_classifier(const Predictor& m, const Dataset& ds) {
  if (!ds.labels()) throw ContractError("metrics require a labelled dataset");
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const int pred = m.predict_proba(ds.row(i)) >= 0.5 ? 1 : 0;
    const int y = (*ds.labels())[i];
    correct += pred == y;
    tp += pred == 1 && y == 1;
    fp += pred == 1 && y == 0;
    fn += pred == 0 && y == 1;
  }
  ClassificationMetrics out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(ds.num_rows());
  out.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = out.precision + out.recall > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace truthcheck
