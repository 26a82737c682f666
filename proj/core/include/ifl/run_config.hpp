#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ifl/classifiers.hpp"
#include "ifl/dataset.hpp"
#include "ifl/engine.hpp"

namespace ifl {

/// One dataset's run description, read from a small TOML-style file:
///
///     name = "heart"
///     data = "../data/heart.csv"      # relative to the config file
///     outer_folds = 10
///
///     [ifl]
///     r = 2
///     k = 3
///     feature_set = "1.0, 1.2, 1.3"
///     metric_l1 = "EU"
///     metric_l2 = "CB"
///
///     [reference]
///     ifl_accuracy = 0.8593
///
/// Unknown keys are rejected.
struct RunConfig {
  std::string name;
  std::filesystem::path data;
  CsvOptions csv;
  std::size_t outer_folds = 10;
  std::uint64_t seed = 42;
  bool normalize = false;
  IflConfig ifl;
  /// Classifier that consumes the augmented features (and the one `evaluate` uses).
  ClassifierConfig classifier;
  /// Published reference scores keyed "<method>_<accuracy|f1>", method in
  /// {naive_bayes, knn, tree, ensemble, ifl}.
  std::map<std::string, double> reference;

  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// Replaces the seed everywhere it is used.
  void set_seed(std::uint64_t value) {
    seed = value;
    ifl.seed = value;
  }
};

}  // namespace ifl
