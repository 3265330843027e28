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

#include <cmath>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/models.hpp"

// JSON model files:
//
//   {"kind": "logistic", "weights": [...], "bias": b, "selftest": [...]}
//   {"kind": "mlp", "layers": [{"weights": [[...], ...], "bias": [...]}, ...],
//    "selftest": [...]}
//
// "selftest" is a list of {"input": [...], "output": p} pairs recorded at save
// time; loading replays them and rejects the file if any output drifts by
// more than 1e-9.

namespace truthcheck {

inline constexpr double kSelfTestTolerance = 1e-9;

inline nlohmann::json model_to_json(const Predictor& m) {
  nlohmann::json j;
  if (const auto* lin = dynamic_cast<const LinearModel*>(&m)) {
    j["kind"] = "logistic";
    j["weights"] = lin->weights();
    j["bias"] = lin->bias();
  } else if (const auto* mlp = dynamic_cast<const MlpModel*>(&m)) {
    j["kind"] = "mlp";
    j["layers"] = nlohmann::json::array();
    for (const auto& layer : mlp->layers()) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(layer.weights.cols()));
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = layer.weights(r, c);
        rows.push_back(row);
      }
      j["layers"].push_back({{"weights", rows},
                             {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
    }
  } else {
    throw UnsupportedError("cannot serialize predictor of kind '" + m.kind() + "'");
  }
  return j;
}

// Serializes m and records its outputs on the given probe inputs.
inline nlohmann::json save_predictor(const Predictor& m, std::span<const Instance> probes) {
  nlohmann::json j = model_to_json(m);
  j["selftest"] = nlohmann::json::array();
  for (const auto& probe : probes) {
    j["selftest"].push_back({{"input", probe.values}, {"output", m.predict_proba(probe)}});
  }
  return j;
}

namespace internal {

inline std::vector<double> read_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw LoadError(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw LoadError(std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace internal

inline std::unique_ptr<Predictor> load_predictor(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw LoadError("model file needs a string 'kind' tag");
  }
  const std::string kind = j["kind"].get<std::string>();
  std::unique_ptr<Predictor> model;
  try {
    if (kind == "logistic" || kind == "linear") {
      if (!j.contains("weights") || !j.contains("bias") || !j["bias"].is_number()) {
        throw LoadError("logistic model needs 'weights' and numeric 'bias'");
      }
      model = std::make_unique<LinearModel>(internal::read_vector(j["weights"], "weights"),
                                            j["bias"].get<double>());
    } else if (kind == "mlp") {
      if (!j.contains("layers") || !j["layers"].is_array()) throw LoadError("mlp model needs 'layers'");
      std::vector<DenseLayer> layers;
      for (const auto& lj : j["layers"]) {
        if (!lj.contains("weights") || !lj["weights"].is_array() || !lj.contains("bias")) {
          throw LoadError("each layer needs 'weights' and 'bias'");
        }
        const auto bias = internal::read_vector(lj["bias"], "bias");
        const auto& rows = lj["weights"];
        if (rows.empty()) throw LoadError("layer has no weight rows");
        const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
        DenseLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols)),
                         Eigen::VectorXd(static_cast<Eigen::Index>(bias.size()))};
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const auto row = internal::read_vector(rows[r], "weight row");
          if (row.size() != cols) throw LoadError("ragged weight matrix");
          for (std::size_t c = 0; c < cols; ++c) layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        for (std::size_t k = 0; k < bias.size(); ++k) layer.bias(static_cast<Eigen::Index>(k)) = bias[k];
        layers.push_back(std::move(layer));
      }
      model = std::make_unique<MlpModel>(std::move(layers));
    } else {
      throw LoadError("unknown model kind '" + kind + "'");
    }
  } catch (const ContractError& e) {
    throw LoadError(std::string("inconsistent model dimensions: ") + e.what());
  }

  if (j.contains("selftest")) {
    for (const auto& t : j["selftest"]) {
      if (!t.contains("input") || !t.contains("output")) throw LoadError("malformed selftest entry");
      const auto input = internal::read_vector(t["input"], "selftest input");
      if (input.size() != model->arity()) throw LoadError("selftest input has wrong arity");
      const double expected = t["output"].get<double>();
      const double got = model->predict_proba(input);
      if (!(std::abs(got - expected) <= kSelfTestTolerance)) {
        throw LoadError("selftest failed: expected " + std::to_string(expected) + ", got " +
                        std::to_string(got));
      }
    }
    model->reset_query_count();
  }
  return model;
}

inline std::unique_ptr<Predictor> load_predictor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return load_predictor(j);
}

}  // namespace truthcheck
