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

// Command-line front end: train, evaluate, benchmark, render-tree.
//
// Exit status: 0 success (or trusted explanation), 1 untrusted explanation,
// 2 usage error, 3 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "truthcheck.hpp"

namespace fs = std::filesystem;
using namespace truthcheck;

namespace {

constexpr int kExitUntrusted = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct DataArgs {
  std::string data;
  std::string schema;
  char delimiter = ',';
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--schema", a.schema, "schema file (column = kind)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--delimiter", a.delimiter, "field delimiter");
}

Dataset load_data(const DataArgs& a) { return load_dataset_file(a.data, load_schema(a.schema), a.delimiter); }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Shared evaluation flags. Values come from the config file first; flags the
// user actually passed override them.
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string config;
  double delta = 0.01;
  std::string mode;
  std::uint64_t seed = 0;
  std::string priority;
  std::string class_target;
  std::string stats;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_eval_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--config", a.config, "key = value config file (default: $" + std::string(kConfigEnvVar) + ")");
  a.delta_opt = cmd->add_option("--delta", a.delta, "stability band for probability changes");
  cmd->add_option("--mode", a.mode, "perturbation mode")->check(CLI::IsMember({"deterministic", "stochastic"}));
  a.seed_opt = cmd->add_option("--seed", a.seed, "root seed");
  cmd->add_option("--priority", a.priority, "comma-separated tie-break order of techniques");
  cmd->add_option("--class", a.class_target, "tracked class")->check(CLI::IsMember({"predicted", "positive", "negative"}));
  cmd->add_option("--stats", a.stats, "perturbation scale source")->check(CLI::IsMember({"training", "local"}));
}

EvaluationConfig build_config(const EvalArgs& a) {
  EvaluationConfig cfg;
  std::string path = a.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  }
  if (!path.empty()) apply_config(load_config_file(path), cfg);
  ConfigMap flags;
  if (a.delta_opt->count()) flags["delta"] = std::to_string(a.delta);
  if (!a.mode.empty()) flags["mode"] = a.mode;
  if (a.seed_opt->count()) flags["seed"] = std::to_string(a.seed);
  if (!a.priority.empty()) flags["priority"] = a.priority;
  if (!a.class_target.empty()) flags["class_target"] = a.class_target;
  if (!a.stats.empty()) flags["stats"] = a.stats;
  apply_config(flags, cfg);
  if (a.delta_opt->count()) cfg.investigator.delta = a.delta;  // keep full precision
  for (const auto& t : cfg.priority) {
    if (!is_known_technique(t)) throw UsageError("unknown technique '" + t + "' in priority");
  }
  return cfg;
}

std::vector<std::string> parse_techniques(const std::string& list) {
  auto out = split_list(list);
  for (const auto& t : out) {
    if (!is_known_technique(t)) {
      throw UsageError("unknown technique '" + t + "' (expected intrinsic, permutation, lime or shap)");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  DataArgs data;
  std::string kind = "logistic";
  std::vector<std::size_t> hidden;
  TrainOptions opts;
  double test_fraction = 0.2;
  std::string out;
};

int run_train(const TrainArgs& a) {
  const Dataset ds = load_data(a.data);
  std::vector<std::size_t> idx(ds.num_rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(a.opts.seed, "split"));
  shuffle(idx, rng);
  const auto n_test = static_cast<std::size_t>(a.test_fraction * static_cast<double>(idx.size()));
  if (n_test >= idx.size()) throw UsageError("--test-fraction leaves no training rows");
  const std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  const Dataset train = ds.select_rows(train_idx);

  std::unique_ptr<Predictor> model;
  if (a.kind == "logistic") {
    model = std::make_unique<LinearModel>(train_logistic(train, a.opts));
  } else {
    model = std::make_unique<MlpModel>(train_mlp(train, a.hidden, a.opts));
  }

  const Dataset held_out = n_test ? ds.select_rows(test_idx) : train;
  const auto metrics = evaluate_classifier(*model, held_out);
  std::vector<Instance> probes;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, held_out.num_rows()); ++i) probes.push_back(held_out.instance(i));
  write_file(a.out, save_predictor(*model, probes).dump(2) + "\n");
  std::printf("%s model: %zu training rows, %zu held-out rows\n", a.kind.c_str(), train.num_rows(),
              n_test ? held_out.num_rows() : std::size_t{0});
  std::printf("held-out accuracy: %.4f\nheld-out f1: %.4f\n", metrics.accuracy, metrics.f1);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  DataArgs data;
  EvalArgs eval;
  std::string model;
  std::string subprocess;
  std::optional<std::size_t> instance;
  std::string values;
  std::string techniques;
  std::vector<std::string> imports;
  std::string out_dir;
  bool quiet = false;
};

std::unique_ptr<Predictor> open_model(const std::string& file, const std::string& command, std::size_t arity) {
  if (!command.empty()) return std::make_unique<SubprocessPredictor>(arity, command);
  auto model = load_predictor_file(file);
  if (model->arity() != arity) {
    throw UsageError("model expects " + std::to_string(model->arity()) + " features, dataset has " +
                     std::to_string(arity));
  }
  return model;
}

int run_evaluate(const EvaluateArgs& a) {
  const EvaluationConfig cfg = build_config(a.eval);
  const Dataset ds = load_data(a.data);
  const auto model = open_model(a.model, a.subprocess, ds.num_features());

  Instance x;
  std::uint64_t key = 0;
  if (a.instance) {
    if (*a.instance >= ds.num_rows()) {
      throw UsageError("instance " + std::to_string(*a.instance) + " is out of range (dataset has " +
                       std::to_string(ds.num_rows()) + " rows)");
    }
    x = ds.instance(*a.instance);
    key = *a.instance;
  } else {
    for (const auto& cell : internal::split(a.values, ',')) {
      const auto v = internal::parse_double(internal::trim(cell));
      if (!v) throw UsageError("--values: '" + std::string(cell) + "' is not a number");
      x.values.push_back(*v);
    }
    if (x.size() != ds.num_features()) {
      throw UsageError("--values has " + std::to_string(x.size()) + " entries, the model expects " +
                       std::to_string(ds.num_features()));
    }
  }

  std::vector<std::string> techniques;
  if (!a.techniques.empty()) {
    techniques = parse_techniques(a.techniques);
  } else if (a.imports.empty()) {
    techniques = {kLime, kKernelShap, kPermutation};
    if (dynamic_cast<const LinearModel*>(model.get())) techniques.insert(techniques.begin(), kIntrinsic);
  }
  std::vector<ImportanceVector> imported;
  for (const auto& path : a.imports) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open importance file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("'" + path + "' is not valid JSON: " + e.what());
    }
    imported.push_back(importance_from_json(j, x));
  }

  const EvaluationResult r = evaluate_instance(*model, techniques, x, ds, cfg, imported, key);
  const std::string dialogue = format_dialogue(r.dialogue);
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    write_file(dir / "result.json", to_json(r).dump(2) + "\n");
    write_file(dir / "dialogue.txt", dialogue);
    const ArgumentTree& tree = r.final_tree ? *r.final_tree : r.initial_trees[r.chosen_index()];
    write_file(dir / "tree.txt", export_tree(tree, TreeFormat::kText));
    write_file(dir / "tree.dot", export_tree(tree, TreeFormat::kGraph));
    write_file(dir / "tree.json", export_tree(tree, TreeFormat::kStructured));
  }
  if (!a.quiet) {
    std::printf("tracked class: %d (p = %.4f)\n", r.target_class, r.reports.front().baseline_probability);
    for (std::size_t t = 0; t < r.reports.size(); ++t) {
      std::printf("%-12s untruthful %zu/%zu  %s\n", r.reports[t].technique_id.c_str(), r.untruthful_counts[t],
                  r.reports[t].evidence.size(), to_string(r.initial_judgements[t]));
    }
    std::printf("chosen: %s\nfinal judgement: %s%s\n", r.chosen_technique.c_str(), to_string(r.final_judgement),
                r.vacuous ? " (vacuous)" : "");
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("\n%s", dialogue.c_str());
  }
  return r.final_judgement == Judgement::kUnwarranted ? 0 : kExitUntrusted;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  DataArgs data;
  EvalArgs eval;
  std::vector<std::string> models;
  std::string techniques = "lime,shap,permutation,intrinsic";
  std::size_t sample = 50;
  std::string ensemble_exclude;
  std::size_t threads = 0;
  std::string out;
};

int run_benchmark_cmd(const BenchmarkArgs& a) {
  const EvaluationConfig cfg = build_config(a.eval);
  const Dataset ds = load_data(a.data);
  std::vector<BenchmarkModel> models;
  for (const auto& spec : a.models) {
    // NAME=PATH, or PATH with the file stem as the name.
    const auto eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const std::string name = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(0, eq);
    if (!fs::exists(path)) throw UsageError("model file '" + path + "' does not exist");
    std::shared_ptr<const Predictor> m = open_model(path, "", ds.num_features());
    models.push_back({name, std::move(m)});
  }
  BenchmarkOptions opts;
  opts.techniques = parse_techniques(a.techniques);
  opts.sample_size = a.sample;
  opts.threads = a.threads;
  for (const auto& t : split_list(a.ensemble_exclude)) opts.ensemble_exclude.insert(t);
  const auto summary = run_benchmark(models, ds, opts, cfg);
  std::printf("%s", format_benchmark_table(summary).c_str());
  if (!a.out.empty()) write_file(a.out, to_json(summary).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// render-tree
// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string result;
  std::string which = "final";
  std::string format = "text";
  std::string out;
};

int run_render(const RenderArgs& a) {
  std::ifstream in(a.result);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("'" + a.result + "' is not valid JSON: " + e.what());
  }
  const TreeFormat format = tree_format_from_string(a.format);
  // Accept a bare tree export as well as a full evaluation result.
  const nlohmann::json* tree_json = &j;
  if (j.contains("initial_tree")) {
    const char* key = a.which == "initial" || j["final_tree"].is_null() ? "initial_tree" : "final_tree";
    tree_json = &j[key];
  }
  const std::string text = export_tree(tree_from_json(*tree_json), format);
  if (a.out.empty()) {
    std::printf("%s", text.c_str());
  } else {
    write_file(a.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks whether feature-importance explanations agree with the model they explain."};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a logistic or MLP classifier and save it");
  add_data_options(train_cmd, train.data);
  train_cmd->add_option("--model", train.kind, "model kind")->check(CLI::IsMember({"logistic", "mlp"}));
  train_cmd->add_option("--hidden", train.hidden, "hidden layer widths (mlp)")->delimiter(',');
  train_cmd->add_option("--epochs", train.opts.epochs, "gradient-descent epochs");
  train_cmd->add_option("--lr", train.opts.learning_rate, "learning rate");
  train_cmd->add_option("--l2", train.opts.l2, "weight decay");
  train_cmd->add_option("--seed", train.opts.seed, "seed for the split and initialisation");
  train_cmd->add_option("--test-fraction", train.test_fraction, "held-out share of rows")
      ->check(CLI::Range(0.0, 0.99));
  train_cmd->add_option("--out", train.out, "model file to write")->required();

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "judge the explanations of one prediction");
  add_data_options(eval_cmd, eval.data);
  add_eval_options(eval_cmd, eval.eval);
  auto* model_opt = eval_cmd->add_option("--model", eval.model, "model file")->check(CLI::ExistingFile);
  auto* sub_opt = eval_cmd->add_option("--subprocess", eval.subprocess, "command speaking the line protocol");
  model_opt->excludes(sub_opt);
  auto* instance_opt = eval_cmd->add_option("--instance", eval.instance, "row index in --data");
  auto* values_opt = eval_cmd->add_option("--values", eval.values, "comma-separated feature values");
  instance_opt->excludes(values_opt);
  eval_cmd->add_option("--techniques", eval.techniques, "comma-separated: intrinsic,permutation,lime,shap");
  eval_cmd->add_option("--import-z", eval.imports, "importance JSON produced elsewhere")->check(CLI::ExistingFile);
  eval_cmd->add_option("--out-dir", eval.out_dir, "directory for result.json, dialogue.txt and tree files");
  eval_cmd->add_flag("--quiet", eval.quiet, "print nothing");

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "untruthful-importance percentages per model and technique");
  add_data_options(bench_cmd, bench.data);
  add_eval_options(bench_cmd, bench.eval);
  bench_cmd->add_option("--model", bench.models, "model file, optionally NAME=PATH; repeatable")->required();
  bench_cmd->add_option("--techniques", bench.techniques, "comma-separated technique list");
  bench_cmd->add_option("--sample", bench.sample, "instances sampled from --data");
  bench_cmd->add_option("--ensemble-exclude", bench.ensemble_exclude, "techniques kept out of the ensemble");
  bench_cmd->add_option("--threads", bench.threads, "worker threads (0 = all cores)");
  bench_cmd->add_option("--out", bench.out, "JSON summary to write");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render-tree", "export an argument tree from a stored result");
  render_cmd->add_option("--result", render.result, "result.json or tree.json")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--which", render.which, "tree to export")->check(CLI::IsMember({"initial", "final"}));
  render_cmd->add_option("--format", render.format, "text, dot or json");
  render_cmd->add_option("--out", render.out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return run_train(train);
    if (*eval_cmd) {
      if (eval.model.empty() && eval.subprocess.empty()) throw UsageError("evaluate needs --model or --subprocess");
      if (!eval.instance && eval.values.empty()) throw UsageError("evaluate needs --instance or --values");
      return run_evaluate(eval);
    }
    if (*bench_cmd) return run_benchmark_cmd(bench);
    if (*render_cmd) return run_render(render);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
