#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ifl/dataset.hpp"
#include "ifl/distance.hpp"
#include "ifl/matrix.hpp"

namespace ifl {

/// Class labels and per-class probabilities for a batch of rows.
struct Predictions {
  std::vector<int> labels;
  Matrix probabilities;
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct TreeParams {
  /// 0 means unlimited depth.
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  /// Nodes with fewer samples than this become leaves.
  std::size_t min_parent = 2;
};

/// One node of a binary CART tree stored in a flat array. Leaves have
/// `feature == -1`; inner nodes send rows with x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> distribution;

  bool is_leaf() const noexcept { return feature < 0; }
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t num_classes, std::size_t width);

  std::span<const double> predict_proba(std::span<const double> row) const;
  int predict(std::span<const double> row) const { return static_cast<int>(argmax(predict_proba(row))); }
  Predictions predict(const Matrix& x) const;

  std::size_t depth() const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t width() const noexcept { return width_; }

 private:
  std::vector<TreeNode> nodes_;
  std::size_t num_classes_ = 0;
  std::size_t width_ = 0;
};

/// Greedy Gini-impurity CART. Split candidates are midpoints between
/// consecutive distinct values; ties prefer the lowest feature index, then
/// the lowest threshold. `weights` may be empty (uniform).
DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::size_t num_classes, const TreeParams& params,
                      std::span<const double> weights = {});

struct BoostParams {
  std::size_t n_learners = 100;
  std::size_t max_depth = 5;
  std::size_t min_leaf = 1;
  double learning_rate = 1.0;
};

/// Multi-class AdaBoost (SAMME) over depth-limited trees.
class BoostedEnsemble {
 public:
  struct Learner {
    DecisionTree tree;
    double weight = 0.0;
  };

  BoostedEnsemble() = default;
  BoostedEnsemble(std::vector<Learner> learners, std::vector<double> prior, std::size_t width);

  std::vector<double> predict_proba(std::span<const double> row) const;
  Predictions predict(const Matrix& x) const;

  const std::vector<Learner>& learners() const noexcept { return learners_; }
  std::size_t learner_count() const noexcept { return learners_.size(); }
  std::size_t num_classes() const noexcept { return prior_.size(); }
  const std::vector<double>& prior() const noexcept { return prior_; }
  std::size_t width() const noexcept { return width_; }
  /// Weighted training error of each accepted learner, recorded during fitting.
  std::vector<double> learner_errors;

 private:
  std::vector<Learner> learners_;
  std::vector<double> prior_;
  std::size_t width_ = 0;
};

/// Boosting stops early when a learner's weighted error reaches 1 - 1/m
/// (that learner is discarded) or hits zero (that learner is kept).
/// Throws ValidationError when y holds a single class.
BoostedEnsemble fit_boosted(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                            const BoostParams& params);

class NaiveBayes {
 public:
  NaiveBayes() = default;
  NaiveBayes(std::vector<double> log_prior, Matrix means, Matrix variances);

  std::vector<double> predict_proba(std::span<const double> row) const;
  Predictions predict(const Matrix& x) const;

  const std::vector<double>& log_prior() const noexcept { return log_prior_; }
  const Matrix& means() const noexcept { return means_; }
  const Matrix& variances() const noexcept { return variances_; }
  std::size_t num_classes() const noexcept { return log_prior_.size(); }
  std::size_t width() const noexcept { return means_.cols(); }
  /// Number of (class, feature) variances raised to the floor during fitting.
  std::size_t floored = 0;

 private:
  std::vector<double> log_prior_;
  Matrix means_;
  Matrix variances_;
};

struct NaiveBayesParams {
  double variance_floor = 1e-9;
};

/// Gaussian naive Bayes with per-class, per-feature unbiased variances.
NaiveBayes fit_naive_bayes(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                           const NaiveBayesParams& params = {});

struct KnnParams {
  std::size_t neighbors = 5;
  Metric metric = Metric::euclidean();
  /// Z-score columns with training statistics before measuring distances.
  bool standardize = false;
};

class Knn {
 public:
  Knn() = default;
  /// `x` is stored as given; `scaling`, when set, maps raw query rows into its space.
  Knn(Matrix x, std::vector<int> y, std::size_t num_classes, KnnParams params,
      std::optional<Standardizer> scaling = std::nullopt);

  std::vector<double> predict_proba(std::span<const double> row) const;
  Predictions predict(const Matrix& x) const;

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t width() const noexcept { return x_.cols(); }
  const KnnParams& params() const noexcept { return params_; }
  const Matrix& points() const noexcept { return x_; }
  const std::vector<int>& targets() const noexcept { return y_; }
  const std::optional<Standardizer>& scaling() const noexcept { return scaling_; }

 private:
  Matrix x_;
  std::vector<int> y_;
  std::size_t num_classes_ = 0;
  KnnParams params_;
  std::optional<Standardizer> scaling_;
};

/// Majority vote among the nearest neighbours (distance ties: lower row index).
Knn fit_knn(const Matrix& x, std::span<const int> y, std::size_t num_classes, const KnnParams& params = {});

enum class ClassifierKind { naive_bayes, knn, tree, boosted };

ClassifierKind parse_classifier_kind(std::string_view text);
std::string to_string(ClassifierKind kind);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::boosted;
  TreeParams tree{0, 1, 10};
  BoostParams boost;
  NaiveBayesParams naive_bayes;
  KnnParams knn;
};

using Model = std::variant<NaiveBayes, Knn, DecisionTree, BoostedEnsemble>;

Model fit(const ClassifierConfig& config, const Matrix& x, std::span<const int> y, std::size_t num_classes);
Predictions predict(const Model& model, const Matrix& x);

/// JSON serialization of fitted models (schema "ifl.model/1"). Diagnostic
/// format, no cross-version stability guarantee.
std::string save_model_json(const Model& model);
Model load_model_json(const std::string& text);

}  // namespace ifl
