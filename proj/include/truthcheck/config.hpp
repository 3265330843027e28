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
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/selector.hpp"

// Key-value configuration ("key = value", '#' comments). Recognised keys:
//
//   delta                 absolute stability band (0.01)
//   mode                  deterministic | stochastic
//   stochastic_repeats    draws per alteration in stochastic mode (5)
//   seed                  root seed (0)
//   priority              comma-separated tie-break order of techniques
//   neutral_band          relative neutrality band zeta (1e-6)
//   neutral_band_absolute absolute neutrality band, overrides neutral_band
//   stats                 training | local
//   class_target          predicted | positive | negative
//   intrinsic_form        coefficient | contribution
//   ridge_lambda          lime ridge penalty (1e-3)
//   kernel_width          lime kernel width (0 = 0.75 sqrt(|F|))
//   local_statistic       neighbor | kernel
//   lime_samples          lime neighbours (1000)
//   shap_coalitions       kernel-shap coalition budget (2048)
//   pi_repeats            permutation repeats (5)

namespace truthcheck {

inline constexpr const char* kConfigEnvVar = "TRUTHCHECK_CONFIG";

using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = internal::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out[std::string(internal::trim(text.substr(0, eq)))] = std::string(internal::trim(text.substr(eq + 1)));
  }
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : internal::split(s, ',')) {
    part = internal::trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

namespace internal {

inline double config_double(const std::string& key, const std::string& v) {
  const auto d = parse_double(v);
  if (!d) throw UsageError("config '" + key + "' expects a number, got '" + v + "'");
  return *d;
}

inline std::size_t config_count(const std::string& key, const std::string& v) {
  const double d = config_double(key, v);
  if (d < 0 || d != std::floor(d)) throw UsageError("config '" + key + "' expects a count, got '" + v + "'");
  return static_cast<std::size_t>(d);
}

}  // namespace internal

inline void apply_config(const ConfigMap& config, EvaluationConfig& cfg) {
  for (const auto& [key, value] : config) {
    if (key == "delta") {
      cfg.investigator.delta = internal::config_double(key, value);
    } else if (key == "mode") {
      if (value == "deterministic") {
        cfg.investigator.mode = PerturbMode::kDeterministic;
      } else if (value == "stochastic") {
        cfg.investigator.mode = PerturbMode::kStochastic;
      } else {
        throw UsageError("mode must be deterministic or stochastic");
      }
    } else if (key == "stochastic_repeats") {
      cfg.investigator.stochastic_repeats = internal::config_count(key, value);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(internal::config_count(key, value));
    } else if (key == "priority") {
      cfg.priority = split_list(value);
    } else if (key == "neutral_band") {
      cfg.investigator.neutral_band_relative = internal::config_double(key, value);
    } else if (key == "neutral_band_absolute") {
      cfg.investigator.neutral_band_absolute = internal::config_double(key, value);
    } else if (key == "stats") {
      if (value == "training") {
        cfg.investigator.stats = StatsSource::kTraining;
      } else if (value == "local") {
        cfg.investigator.stats = StatsSource::kLocal;
      } else {
        throw UsageError("stats must be training or local");
      }
    } else if (key == "class_target") {
      cfg.class_target = class_target_from_string(value);
    } else if (key == "intrinsic_form") {
      if (value == "coefficient") {
        cfg.intrinsic_form = IntrinsicForm::kCoefficient;
      } else if (value == "contribution") {
        cfg.intrinsic_form = IntrinsicForm::kContribution;
      } else {
        throw UsageError("intrinsic_form must be coefficient or contribution");
      }
    } else if (key == "ridge_lambda") {
      cfg.lime.ridge_lambda = internal::config_double(key, value);
    } else if (key == "kernel_width") {
      cfg.lime.kernel_width = internal::config_double(key, value);
    } else if (key == "local_statistic") {
      if (value == "neighbor") {
        cfg.lime.local_statistic = LocalStatistic::kNeighborStd;
      } else if (value == "kernel") {
        cfg.lime.local_statistic = LocalStatistic::kKernelWeightedStd;
      } else {
        throw UsageError("local_statistic must be neighbor or kernel");
      }
    } else if (key == "lime_samples") {
      cfg.lime.n_samples = internal::config_count(key, value);
    } else if (key == "shap_coalitions") {
      cfg.shap.n_coalitions = internal::config_count(key, value);
    } else if (key == "pi_repeats") {
      cfg.permutation.repeats = internal::config_count(key, value);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
}

}  // namespace truthcheck
