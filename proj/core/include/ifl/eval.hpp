#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ifl/classifiers.hpp"
#include "ifl/dataset.hpp"
#include "ifl/engine.hpp"
#include "ifl/metrics.hpp"
#include "ifl/run_config.hpp"

namespace ifl {

/// Train on `train`, predict `test`. With an IFL config the classifier sees
/// learned features (train phase on `train`, test phase on `test`);
/// otherwise the raw columns. `normalize` z-scores columns with training
/// statistics first.
Predictions fit_predict(const Dataset& train, const Matrix& test, const std::optional<IflConfig>& ifl,
                        const ClassifierConfig& classifier, bool normalize = false);

struct FoldResult {
  std::size_t fold = 0;
  bool skipped = false;
  std::string note;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double seconds = 0.0;
  std::vector<std::size_t> test_indices;
  std::vector<int> truth;
  std::vector<int> predictions;
};

struct EvalResult {
  std::string dataset;
  std::string method;
  std::size_t num_classes = 0;
  std::size_t requested_folds = 0;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;
  double wall_seconds = 0.0;
  /// JSON snapshot of the IFL and classifier settings used.
  std::string config_json;
};

struct EvalOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  bool normalize = false;
  std::size_t jobs = 0;
  /// Label stored in EvalResult::method; derived from the config when empty.
  std::string method;
};

/// Stratified k-fold cross-validation. A fold whose training part lacks a
/// class is skipped with a warning and excluded from the means.
EvalResult cross_validate(const Dataset& dataset, const std::optional<IflConfig>& ifl,
                          const ClassifierConfig& classifier, const EvalOptions& options);

/// Results file (schema "ifl.eval/1") with per-fold predictions.
std::string eval_result_json(const EvalResult& result);
EvalResult parse_eval_result_json(const std::string& text);
/// Recomputes every fold metric and the means from the stored predictions.
bool verify_eval_result(const EvalResult& result, double tolerance = 1e-12);

inline const std::vector<std::string>& report_methods() {
  static const std::vector<std::string> methods = {"naive_bayes", "knn", "tree", "ensemble", "ifl"};
  return methods;
}

struct ReportRow {
  std::string dataset;
  std::filesystem::path config;
  std::string note;
  std::map<std::string, EvalResult> results;
  std::map<std::string, double> reference;
  double wall_seconds = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
  double total_seconds = 0.0;
};

struct ReproduceOptions {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  /// Subset of report_methods() to run; empty runs all.
  std::vector<std::string> methods;
  /// Dataset names to run; empty runs every config found.
  std::vector<std::string> only;
};

/// Evaluates one config with the requested methods.
ReportRow evaluate_config(const RunConfig& config, const ReproduceOptions& options);

/// Runs every `*.toml` config in `config_dir` (sorted by file name) and writes
/// a Markdown report to `output_path` plus JSON detail next to it.
Report reproduce(const std::filesystem::path& config_dir, const std::filesystem::path& output_path,
                 const ReproduceOptions& options = {});

std::string report_markdown(const Report& report);
std::string report_json(const Report& report);

}  // namespace ifl
