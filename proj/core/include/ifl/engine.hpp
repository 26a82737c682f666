#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifl/dataset.hpp"
#include "ifl/distance.hpp"
#include "ifl/matrix.hpp"

namespace ifl {

/// Identifiers of the learned error features, in emission order.
enum class Feature : std::uint8_t {
  nearest_member = 0,      // 1.0  distance to closest other member of the updated cluster
  updated_mean = 1,        // 1.1  distance to the updated mean
  updated_centroids = 2,   // 1.2  distance to each updated cluster centroid
  updated_means = 3,       // 1.3  distance to each updated cluster mean
  mean_shift = 4,          // 2.1  group mean before vs after insertion
  centroid_shift = 5,      // 2.2  per-rank centroid displacement
  confidence_shift = 6,    // 2.3  per-rank confidence change
  cluster_mean_shift = 7,  // 2.4  per-rank cluster-mean displacement
};

inline constexpr std::size_t kFeatureCount = 8;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureIds = {"1.0", "1.1", "1.2", "1.3",
                                                                           "2.1", "2.2", "2.3", "2.4"};

/// True for features emitted once per cluster rank, false for scalars.
constexpr bool is_per_cluster(Feature f) noexcept {
  switch (f) {
    case Feature::updated_centroids:
    case Feature::updated_means:
    case Feature::centroid_shift:
    case Feature::confidence_shift:
    case Feature::cluster_mean_shift:
      return true;
    default:
      return false;
  }
}

/// A non-empty subset of the eight learned features.
class FeatureSet {
 public:
  FeatureSet() = default;
  static FeatureSet all();
  /// Parses "1.0, 1.2, 1.3" style lists (comma or whitespace separated).
  static FeatureSet parse(std::string_view text);

  FeatureSet& add(Feature f) noexcept {
    bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(f));
    return *this;
  }
  bool contains(Feature f) const noexcept { return (bits_ >> static_cast<unsigned>(f)) & 1u; }
  bool empty() const noexcept { return bits_ == 0; }
  /// Selected features in emission order.
  std::vector<Feature> members() const;
  /// Per-class vector length: scalars count 1, per-cluster features count k.
  std::size_t length(std::size_t k) const;
  std::string to_string() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Which rows the updated class mean averages over.
enum class MeanScope {
  closest_cluster,  // members of the updated closest cluster, including the inserted row
  group,            // every row of the class plus the inserted row
};

struct IflConfig {
  std::size_t r = 5;
  std::size_t k = 3;
  FeatureSet features = FeatureSet::all();
  Metric metric_l1 = Metric::euclidean();
  Metric metric_l2 = Metric::euclidean();
  /// Layer-3 metric; defaults to metric_l1 when unset.
  std::optional<Metric> metric_l3;
  int strategy = 1;
  std::uint64_t seed = 42;
  /// Per-class block multipliers; empty selects default_multipliers(m).
  std::vector<double> multipliers;
  MeanScope mean_scope = MeanScope::closest_cluster;
  std::size_t kmeans_max_iter = 100;
  /// Worker threads; 0 = one per logical core.
  std::size_t jobs = 0;

  Metric layer3_metric() const { return metric_l3.value_or(metric_l1); }
  /// Multipliers for m classes (explicit or defaulted), validated.
  std::vector<double> multipliers_for(std::size_t m) const;
  /// Throws InvalidParameter when a field is out of range.
  void validate() const;
};

/// 1, 10, 20, 30, ...: the first class keeps its scale, class i >= 2 is scaled by 10(i-1).
std::vector<double> default_multipliers(std::size_t m);

struct ClusterSummary {
  /// Row indices into the class's row matrix; the inserted row, when present, is index s.
  std::vector<std::size_t> members;
  std::vector<double> centroid;
  std::vector<double> mean;
  double confidence = 0.0;
  /// Column sums of the member rows, accumulated in ascending member order.
  std::vector<double> member_sum;

  std::size_t size() const noexcept { return members.size(); }
};

/// Layer-1 representation of one class.
struct ClassModel {
  int class_id = 0;
  std::vector<double> group_mean;
  std::vector<double> group_sum;
  /// Sorted by descending size; ties keep ascending k-means cluster index.
  std::vector<ClusterSummary> clusters;
  std::size_t class_size = 0;
};

/// Layer-2 result of inserting one row into one class.
struct TrialOutcome {
  int class_id = 0;
  int strategy = 1;
  std::vector<double> updated_group_mean;
  std::vector<ClusterSummary> updated_clusters;
  /// Rank (in updated_clusters) of the cluster holding the inserted row.
  std::size_t closest_index = 0;
  /// Strategy 1: layer-1 rank of the cluster that received the row.
  std::size_t source_index = 0;
};

struct TrialDiagnostics {
  /// Feature-set-2 ranks missing on one side and zero-filled.
  std::size_t padded_ranks = 0;
  /// Feature 1.0 fell back to the whole class because the cluster held only the inserted row.
  bool nearest_member_fallback = false;
};

ClassModel build_class_model(const Matrix& group_rows, int class_id, const IflConfig& cfg, std::uint64_t seed);

TrialOutcome trial_strategy1(const ClassModel& model, const Matrix& group_rows, std::span<const double> x,
                             const IflConfig& cfg);

TrialOutcome trial_strategy2(const Matrix& group_rows, std::span<const double> x, int class_id,
                             const IflConfig& cfg, std::uint64_t seed);

/// Layer-3 error features for one (row, class) trial, in fixed emission
/// order; length is cfg.features.length(cfg.k). Missing ranks are zero.
std::vector<double> compute_error_features(const ClassModel& model, const TrialOutcome& outcome,
                                           const Matrix& group_rows, std::span<const double> x,
                                           const IflConfig& cfg, TrialDiagnostics* diagnostics = nullptr);

/// Concatenates multiplier_i * block_i over classes.
std::vector<double> embed_class(std::span<const std::vector<double>> per_class, std::span<const double> multipliers);

/// Generated names `ifl_c<class>_<feature>[_<rank>]` (1-based class and rank).
std::vector<std::string> learned_column_names(std::size_t m, const IflConfig& cfg);

struct AugmentDiagnostics {
  std::size_t trials = 0;
  std::size_t missing_class_trials = 0;
  std::size_t padded_ranks = 0;
  std::size_t nearest_member_fallbacks = 0;
  std::vector<std::string> warnings;
};

struct Augmented {
  /// Original columns followed by m * L learned columns.
  Matrix features;
  std::vector<std::string> column_names;
  AugmentDiagnostics diagnostics;
};

/// Train-phase learning: every row receives features from the classes of
/// the other inner folds. Labels of the held-out fold are never read.
Augmented learn_train_features(const Dataset& train, const IflConfig& cfg);
Augmented learn_train_features(const Dataset& train, const FoldPlan& plan, const IflConfig& cfg);

/// Test-phase learning: class models come from the full training set.
Augmented learn_test_features(const Dataset& train, const Matrix& test_rows, const IflConfig& cfg);

}  // namespace ifl
