#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifl/matrix.hpp"

namespace ifl {

/// A labelled tabular dataset.
///
/// Labels are stored as 0-based class indices into `label_names`; class
/// indices follow first appearance in the source file. Construct through
/// `Dataset::create`, which enforces the invariants (finite features,
/// n >= m >= 2, h >= 1, every label referencing a name).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::string name;
  /// Optional header names for the feature columns (empty when the file had none).
  std::vector<std::string> feature_names;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t width() const noexcept { return features.cols(); }
  std::size_t num_classes() const noexcept { return label_names.size(); }

  /// Validates and returns a dataset; throws ValidationError on violation.
  static Dataset create(Matrix features, std::vector<int> labels,
                        std::vector<std::string> label_names, std::string name = {});

  /// Same dataset restricted to the listed rows (label dictionary unchanged).
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CsvOptions {
  bool has_header = false;
  /// Column holding the label; negative values count from the end (-1 = last).
  int label_column = -1;
  char delimiter = ',';
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {}, std::string name = {});

/// Writes features followed by the label name as the last column. Values are
/// printed with round-trip precision so `load_csv` recovers identical bits.
void write_csv(const std::filesystem::path& path, const Dataset& dataset, bool header = false);
std::string to_csv(const Dataset& dataset, bool header = false);

/// Writes a bare numeric matrix with an optional header row.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {},
                      const std::vector<std::string>& trailing_column = {},
                      const std::string& trailing_name = "label");

/// r disjoint folds of row indices covering [0, n).
struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return folds.size(); }
  /// All indices outside fold `j`, ascending.
  std::vector<std::size_t> complement(std::size_t j) const;
};

/// Stratified partition of the dataset's rows into `r` folds.
///
/// Each class is shuffled with the seed and dealt round-robin, continuing the
/// deal position across classes so fold sizes differ by at most one. A class
/// with a single member triggers a warning and lands in one fold.
FoldPlan stratified_folds(std::span<const int> labels, std::size_t r, std::uint64_t seed);
FoldPlan stratified_folds(const Dataset& dataset, std::size_t r, std::uint64_t seed);

struct LabelGroup {
  int class_id = 0;
  std::vector<std::size_t> indices;
};

/// Groups `indices` by label; groups are ordered by class index and only
/// classes present in `indices` appear.
std::vector<LabelGroup> group_by_label(std::span<const int> labels,
                                       std::span<const std::size_t> indices);

/// Per-column z-score transform fitted on one matrix and applied to others.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale);
  static Standardizer fit(const Matrix& m);
  Matrix transform(const Matrix& m) const;
  std::vector<double> transform(std::span<const double> row) const;

  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace ifl
