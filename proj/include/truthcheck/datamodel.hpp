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
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "truthcheck/errors.hpp"

namespace truthcheck {

enum class FeatureKind { kContinuous, kBinaryOneHot, kOrdinal };

inline const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous:
      return "continuous";
    case FeatureKind::kBinaryOneHot:
      return "binary";
    case FeatureKind::kOrdinal:
      return "ordinal";
  }
  return "?";
}

// Declared shape of one input column. Levels are only used by ordinals.
struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  std::vector<double> levels{};
};

// Per-feature distribution summary. Statistics are population moments
// (divide by N); they size the perturbations applied by the investigator.
struct FeatureMeta {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  std::vector<double> levels{};
  double mean = 0.0;
  double std_dev = 0.0;
  double observed_min = 0.0;
  double observed_max = 0.0;
};

// The feature values of one example, v_1 .. v_|F|.
struct Instance {
  std::vector<double> values{};

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
  std::span<const double> span() const { return values; }

  // Copy of this instance with feature j replaced.
  Instance with(std::size_t j, double v) const {
    Instance out = *this;
    out.values.at(j) = v;
    return out;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

namespace internal {

inline void validate_spec(const FeatureSpec& spec) {
  if (spec.kind != FeatureKind::kOrdinal) return;
  if (spec.levels.empty()) {
    throw SchemaError("ordinal feature '" + spec.name + "' has no levels");
  }
  for (std::size_t i = 1; i < spec.levels.size(); ++i) {
    if (!(spec.levels[i - 1] < spec.levels[i])) {
      throw SchemaError("ordinal levels of '" + spec.name +
                        "' are not strictly increasing");
    }
  }
}

}  // namespace internal

// Two-pass population statistics over one column.
inline FeatureMeta compute_feature_meta(const FeatureSpec& spec,
                                        std::span<const double> column) {
  if (column.empty()) throw ContractError("cannot summarize an empty column");
  FeatureMeta meta{spec.name, spec.kind, spec.levels};
  double sum = 0.0;
  meta.observed_min = column.front();
  meta.observed_max = column.front();
  for (double v : column) {
    sum += v;
    meta.observed_min = std::min(meta.observed_min, v);
    meta.observed_max = std::max(meta.observed_max, v);
  }
  const double n = static_cast<double>(column.size());
  // Rounding can push the mean of a near-constant column just outside its range.
  meta.mean = std::clamp(sum / n, meta.observed_min, meta.observed_max);
  double sq = 0.0;
  for (double v : column) sq += (v - meta.mean) * (v - meta.mean);
  meta.std_dev = std::sqrt(sq / n);
  return meta;
}

// An immutable N x |F| table of reals with per-feature statistics and an
// optional label column.
class Dataset {
 public:
  Dataset(std::vector<FeatureSpec> specs, std::vector<std::vector<double>> rows,
          std::optional<std::vector<int>> labels = std::nullopt,
          std::string label_name = "label")
      : label_name_(std::move(label_name)), labels_(std::move(labels)) {
    const std::size_t nf = specs.size();
    if (nf == 0) throw ContractError("dataset needs at least one feature");
    if (rows.empty()) throw ContractError("dataset needs at least one row");
    if (labels_ && labels_->size() != rows.size()) {
      throw ContractError("label count does not match row count");
    }
    values_.reserve(rows.size() * nf);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != nf) {
        throw ContractError("row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) +
                            " values, expected " + std::to_string(nf));
      }
      for (double v : rows[i]) {
        if (!std::isfinite(v)) {
          throw ContractError("row " + std::to_string(i) + " has a non-finite value");
        }
      }
      values_.insert(values_.end(), rows[i].begin(), rows[i].end());
    }
    num_rows_ = rows.size();
    num_features_ = nf;
    features_.reserve(nf);
    for (std::size_t j = 0; j < nf; ++j) {
      internal::validate_spec(specs[j]);
      const std::vector<double> col = column(j);
      for (double v : col) check_domain(specs[j], v, j);
      features_.push_back(compute_feature_meta(specs[j], col));
    }
  }

  std::size_t num_features() const { return num_features_; }
  std::size_t num_rows() const { return num_rows_; }

  std::span<const double> row(std::size_t i) const {
    if (i >= num_rows_) throw BoundsError("row index " + std::to_string(i) + " out of range");
    return {values_.data() + i * num_features(), num_features()};
  }

  Instance instance(std::size_t i) const {
    auto r = row(i);
    return Instance{{r.begin(), r.end()}};
  }

  std::vector<double> column(std::size_t j) const {
    if (j >= num_features_) throw BoundsError("feature index " + std::to_string(j) + " out of range");
    std::vector<double> out(num_rows_);
    for (std::size_t i = 0; i < num_rows_; ++i) out[i] = values_[i * num_features_ + j];
    return out;
  }

  const FeatureMeta& feature(std::size_t j) const {
    if (j >= features_.size()) {
      throw BoundsError("feature index " + std::to_string(j) + " out of range");
    }
    return features_[j];
  }
  const std::vector<FeatureMeta>& features() const { return features_; }

  std::vector<FeatureSpec> specs() const {
    std::vector<FeatureSpec> out;
    for (const auto& f : features_) out.push_back({f.name, f.kind, f.levels});
    return out;
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> out;
    for (const auto& f : features_) out.push_back(f.name);
    return out;
  }

  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::string& label_name() const { return label_name_; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out;
    out.reserve(num_rows_);
    for (std::size_t i = 0; i < num_rows_; ++i) {
      auto r = row(i);
      out.emplace_back(r.begin(), r.end());
    }
    return out;
  }

  // Same rows with labels y -> 1 - y; used when explaining the negative class.
  Dataset with_flipped_labels() const {
    Dataset out = *this;
    if (out.labels_) {
      for (int& y : *out.labels_) y = 1 - y;
    }
    return out;
  }

  // Subset of rows, statistics recomputed.
  Dataset select_rows(std::span<const std::size_t> indices) const {
    std::vector<std::vector<double>> r;
    std::optional<std::vector<int>> l;
    if (labels_) l.emplace();
    for (std::size_t i : indices) {
      auto src = row(i);
      r.emplace_back(src.begin(), src.end());
      if (labels_) l->push_back((*labels_)[i]);
    }
    return Dataset(specs(), std::move(r), std::move(l), label_name_);
  }

 private:
  static void check_domain(const FeatureSpec& spec, double v, std::size_t j) {
    if (spec.kind == FeatureKind::kBinaryOneHot && v != 0.0 && v != 1.0) {
      throw ContractError("binary feature '" + spec.name + "' (column " +
                          std::to_string(j) + ") holds a value other than 0/1");
    }
    if (spec.kind == FeatureKind::kOrdinal &&
        std::find(spec.levels.begin(), spec.levels.end(), v) == spec.levels.end()) {
      throw ContractError("ordinal feature '" + spec.name + "' (column " +
                          std::to_string(j) + ") holds an undeclared level");
    }
  }

  std::vector<FeatureMeta> features_;
  std::vector<double> values_;
  std::size_t num_rows_ = 0;
  std::size_t num_features_ = 0;
  std::string label_name_;
  std::optional<std::vector<int>> labels_;
};

inline FeatureMeta feature_stats(const Dataset& ds, std::size_t j) {
  return ds.feature(j);
}

// ---------------------------------------------------------------------------
// Schema: one "column = kind" line per column.
//
//   # comment
//   variance = continuous
//   smoker   = binary
//   grade    = ordinal 1 2 3
//   class    = label
// ---------------------------------------------------------------------------

struct SchemaEntry {
  std::string column;
  bool is_label = false;
  FeatureSpec spec;
};

struct Schema {
  std::vector<SchemaEntry> entries{};

  const SchemaEntry* find(std::string_view column) const {
    for (const auto& e : entries) {
      if (e.column == column) return &e;
    }
    return nullptr;
  }
};

namespace internal {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out{};
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Shortest-safe decimal for bit-exact round trips.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace internal

inline Schema parse_schema(std::istream& in) {
  Schema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = internal::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw SchemaError("schema line " + std::to_string(line_no) + ": expected 'column = kind'");
    }
    SchemaEntry entry;
    entry.column = std::string(internal::trim(text.substr(0, eq)));
    entry.spec.name = entry.column;
    std::istringstream kind_stream{std::string(internal::trim(text.substr(eq + 1)))};
    std::string kind;
    kind_stream >> kind;
    if (entry.column.empty()) {
      throw SchemaError("schema line " + std::to_string(line_no) + ": empty column name");
    }
    if (schema.find(entry.column)) {
      throw SchemaError("column '" + entry.column + "' declared twice");
    }
    if (kind == "continuous") {
      entry.spec.kind = FeatureKind::kContinuous;
    } else if (kind == "binary" || kind == "onehot" || kind == "binary_onehot") {
      entry.spec.kind = FeatureKind::kBinaryOneHot;
    } else if (kind == "ordinal") {
      entry.spec.kind = FeatureKind::kOrdinal;
      std::string level;
      while (kind_stream >> level) {
        const auto v = internal::parse_double(level);
        if (!v) throw SchemaError("ordinal level '" + level + "' is not numeric");
        entry.spec.levels.push_back(*v);
      }
      internal::validate_spec(entry.spec);
    } else if (kind == "label") {
      entry.is_label = true;
    } else {
      throw SchemaError("column '" + entry.column + "': unknown kind '" + kind + "'");
    }
    schema.entries.push_back(std::move(entry));
  }
  if (std::count_if(schema.entries.begin(), schema.entries.end(),
                    [](const SchemaEntry& e) { return e.is_label; }) > 1) {
    throw SchemaError("more than one label column declared");
  }
  return schema;
}

inline Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  return parse_schema(in);
}

// Reads delimiter-separated numeric columns with a mandatory header row. Every
// header column must be declared by the schema and vice versa. Missing cells
// are rejected.
inline Dataset load_dataset(std::istream& in, const Schema& schema, char delimiter = ',') {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header row", 0, 0);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = internal::split(line, delimiter);

  std::vector<FeatureSpec> specs{};
  std::vector<std::size_t> feature_cols{};
  std::optional<std::size_t> label_col{};
  std::string label_name = "label";
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(internal::trim(header[c]));
    const SchemaEntry* entry = schema.find(name);
    if (!entry) throw SchemaError("column '" + name + "' is not declared in the schema");
    if (entry->is_label) {
      label_col = c;
      label_name = name;
    } else {
      specs.push_back(entry->spec);
      feature_cols.push_back(c);
    }
  }
  for (const auto& e : schema.entries) {
    const bool present = std::any_of(header.begin(), header.end(), [&](std::string_view h) {
      return internal::trim(h) == e.column;
    });
    if (!present) throw SchemaError("schema column '" + e.column + "' missing from header");
  }

  std::vector<std::vector<double>> rows{};
  std::optional<std::vector<int>> labels{};
  if (label_col) labels.emplace();
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (internal::trim(line).empty()) continue;
    ++row_no;
    const auto cells = internal::split(line, delimiter);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row_no, std::min(cells.size(), header.size()));
    }
    std::vector<double> values;
    values.reserve(feature_cols.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = internal::parse_double(cells[c]);
      if (!v) {
        throw ParseError(internal::trim(cells[c]).empty()
                             ? std::string("missing value")
                             : "non-numeric cell '" + std::string(internal::trim(cells[c])) + "'",
                         row_no, c);
      }
      if (label_col && c == *label_col) {
        if (*v != std::floor(*v) || *v < 0) {
          throw ParseError("label must be a non-negative integer", row_no, c);
        }
        labels->push_back(static_cast<int>(*v));
      } else {
        values.push_back(*v);
      }
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const double v = values[k];
      if (specs[k].kind == FeatureKind::kBinaryOneHot && v != 0.0 && v != 1.0) {
        throw ParseError("binary column holds a value other than 0/1", row_no, feature_cols[k]);
      }
      if (specs[k].kind == FeatureKind::kOrdinal &&
          std::find(specs[k].levels.begin(), specs[k].levels.end(), v) == specs[k].levels.end()) {
        throw ParseError("value is not a declared ordinal level", row_no, feature_cols[k]);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("no data rows", 0, 0);
  return Dataset(std::move(specs), std::move(rows), std::move(labels), label_name);
}

inline Dataset load_dataset_file(const std::string& path, const Schema& schema,
                                 char delimiter = ',') {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open data file '" + path + "'");
  return load_dataset(in, schema, delimiter);
}

// Canonical re-emission: header, then rows with 17 significant digits; the
// label column (if any) comes last.
inline void write_dataset(std::ostream& out, const Dataset& ds, char delimiter = ',') {
  for (std::size_t j = 0; j < ds.num_features(); ++j) {
    if (j) out << delimiter;
    out << ds.feature(j).name;
  }
  if (ds.labels()) out << delimiter << ds.label_name();
  out << '\n';
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const auto r = ds.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << delimiter;
      out << internal::format_double(r[j]);
    }
    if (ds.labels()) out << delimiter << (*ds.labels())[i];
    out << '\n';
  }
}

inline void write_schema(std::ostream& out, const Dataset& ds) {
  for (const auto& f : ds.features()) {
    out << f.name << " = " << to_string(f.kind);
    for (double l : f.levels) out << ' ' << internal::format_double(l);
    out << '\n';
  }
  if (ds.labels()) out << ds.label_name() << " = label\n";
}

}  // namespace truthcheck
