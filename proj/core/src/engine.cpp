#include "ifl/engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "ifl/error.hpp"
#include "ifl/kmeans.hpp"
#include "ifl/log.hpp"
#include "ifl/parallel.hpp"
#include "ifl/seed.hpp"

namespace ifl {
namespace {

std::vector<double> divide(std::span<const double> sum, std::size_t n) {
  std::vector<double> out(sum.begin(), sum.end());
  const double d = static_cast<double>(n);
  for (double& v : out) v /= d;
  return out;
}

// Summaries for a finished clustering, sorted by descending size (stable on cluster index).
std::vector<ClusterSummary> summarize(const Matrix& points, const Clustering& clustering) {
  const std::size_t k = clustering.k();
  std::vector<ClusterSummary> clusters(k);
  for (auto& c : clusters) c.member_sum.assign(points.cols(), 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto& c = clusters[clustering.assignments[i]];
    c.members.push_back(i);
    auto row = points.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) c.member_sum[j] += row[j];
  }
  const double total = static_cast<double>(points.rows());
  for (std::size_t t = 0; t < k; ++t) {
    auto& c = clusters[t];
    c.mean = divide(c.member_sum, c.size());
    auto centroid = clustering.centroids.row(t);
    c.centroid.assign(centroid.begin(), centroid.end());
    c.confidence = static_cast<double>(c.size()) / total;
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const ClusterSummary& a, const ClusterSummary& b) { return a.size() > b.size(); });
  return clusters;
}

std::vector<double> column_sum(const Matrix& rows) {
  std::vector<double> sum(rows.cols(), 0.0);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto row = rows.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) sum[j] += row[j];
  }
  return sum;
}

std::vector<double> mean_with(std::span<const double> sum, std::span<const double> x, std::size_t count) {
  std::vector<double> out(sum.size());
  const double d = static_cast<double>(count);
  for (std::size_t j = 0; j < sum.size(); ++j) out[j] = (sum[j] + x[j]) / d;
  return out;
}

void check_width(std::span<const double> x, std::size_t h, const char* where) {
  if (x.size() != h)
    throw InvalidParameter(std::string(where) + ": row width " + std::to_string(x.size()) +
                           " does not match class width " + std::to_string(h));
}

void validate_plan(const FoldPlan& plan, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto& fold : plan.folds)
    for (std::size_t i : fold) {
      if (i >= n || seen[i]) throw InvalidParameter("fold plan is not a partition of the dataset rows");
      seen[i] = 1;
    }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidParameter("fold plan does not cover every row");
}

struct RowStats {
  std::size_t trials = 0;
  std::size_t missing = 0;
  std::size_t padded = 0;
  std::size_t fallbacks = 0;
};

// Trials one row against every class and writes the embedded block after the original columns.
RowStats augment_row(std::span<const double> x, std::span<double> out_row, std::size_t h,
                     const std::vector<std::optional<ClassModel>>& models, const std::vector<Matrix>& group_rows,
                     const std::vector<double>& multipliers, const IflConfig& cfg, std::uint64_t fold,
                     std::uint64_t instance) {
  RowStats stats;
  const std::size_t m = models.size();
  const std::size_t len = cfg.features.length(cfg.k);
  std::copy(x.begin(), x.end(), out_row.begin());
  std::vector<std::vector<double>> blocks(m);
  for (std::size_t c = 0; c < m; ++c) {
    if (!models[c]) {
      blocks[c].assign(len, 0.0);
      ++stats.missing;
      continue;
    }
    const auto& model = *models[c];
    TrialOutcome outcome =
        cfg.strategy == 1
            ? trial_strategy1(model, group_rows[c], x, cfg)
            : trial_strategy2(group_rows[c], x, static_cast<int>(c), cfg,
                              derive_seed(cfg.seed, fold, c, instance));
    TrialDiagnostics diag;
    blocks[c] = compute_error_features(model, outcome, group_rows[c], x, cfg, &diag);
    ++stats.trials;
    stats.padded += diag.padded_ranks;
    stats.fallbacks += diag.nearest_member_fallback ? 1 : 0;
  }
  auto embedded = embed_class(blocks, multipliers);
  std::copy(embedded.begin(), embedded.end(), out_row.begin() + static_cast<std::ptrdiff_t>(h));
  return stats;
}

void build_models(const Dataset& data, std::span<const std::size_t> indices, const IflConfig& cfg,
                  std::uint64_t fold, std::vector<std::optional<ClassModel>>& models,
                  std::vector<Matrix>& group_rows) {
  const std::size_t m = data.num_classes();
  models.assign(m, std::nullopt);
  group_rows.assign(m, Matrix());
  auto groups = group_by_label(data.labels, indices);
  for (const auto& g : groups) group_rows[static_cast<std::size_t>(g.class_id)] = data.features.select_rows(g.indices);
  parallel_for(groups.size(), cfg.jobs, [&](std::size_t gi) {
    const auto c = static_cast<std::size_t>(groups[gi].class_id);
    models[c] = build_class_model(group_rows[c], groups[gi].class_id, cfg, derive_seed(cfg.seed, fold, c, kNoIndex));
  });
}

std::vector<std::string> original_names(const Dataset& data) {
  if (data.feature_names.size() == data.width()) return data.feature_names;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < data.width(); ++c) names.push_back("x" + std::to_string(c + 1));
  return names;
}

void finish_diagnostics(AugmentDiagnostics& d, const std::vector<RowStats>& stats) {
  for (const auto& s : stats) {
    d.trials += s.trials;
    d.missing_class_trials += s.missing;
    d.padded_ranks += s.padded;
    d.nearest_member_fallbacks += s.fallbacks;
  }
  if (d.padded_ranks > 0)
    d.warnings.push_back(std::to_string(d.padded_ranks) +
                         " cluster rank(s) had no counterpart across layers and were zero-filled");
  for (const auto& w : d.warnings) log::warn(w);
}

}  // namespace

FeatureSet FeatureSet::all() {
  FeatureSet s;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s.add(static_cast<Feature>(i));
  return s;
}

FeatureSet FeatureSet::parse(std::string_view text) {
  FeatureSet s;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    auto it = std::find(kFeatureIds.begin(), kFeatureIds.end(), token);
    if (it == kFeatureIds.end()) throw InvalidParameter("unknown feature id '" + token + "'");
    s.add(static_cast<Feature>(it - kFeatureIds.begin()));
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch)) || ch == '[' || ch == ']' || ch == '"') flush();
    else token += ch;
  }
  flush();
  if (s.empty()) throw InvalidParameter("feature set must not be empty");
  return s;
}

std::vector<Feature> FeatureSet::members() const {
  std::vector<Feature> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (contains(static_cast<Feature>(i))) out.push_back(static_cast<Feature>(i));
  return out;
}

std::size_t FeatureSet::length(std::size_t k) const {
  std::size_t n = 0;
  for (Feature f : members()) n += is_per_cluster(f) ? k : 1;
  return n;
}

std::string FeatureSet::to_string() const {
  std::string out;
  for (Feature f : members()) {
    if (!out.empty()) out += ", ";
    out += kFeatureIds[static_cast<std::size_t>(f)];
  }
  return out;
}

std::vector<double> default_multipliers(std::size_t m) {
  std::vector<double> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(i == 0 ? 1.0 : 10.0 * static_cast<double>(i));
  return out;
}

std::vector<double> IflConfig::multipliers_for(std::size_t m) const {
  std::vector<double> out = multipliers.empty() ? default_multipliers(m) : multipliers;
  if (out.size() != m)
    throw InvalidParameter("multiplier count " + std::to_string(out.size()) + " != class count " +
                           std::to_string(m));
  std::set<double> distinct(out.begin(), out.end());
  if (distinct.size() != out.size()) throw InvalidParameter("multipliers must be pairwise distinct");
  for (double v : out)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter("multipliers must be positive and finite");
  return out;
}

void IflConfig::validate() const {
  if (r < 2) throw InvalidParameter("ifl: r must be >= 2");
  if (k < 1) throw InvalidParameter("ifl: k must be >= 1");
  if (features.empty()) throw InvalidParameter("ifl: feature set must not be empty");
  if (strategy != 1 && strategy != 2) throw InvalidParameter("ifl: strategy must be 1 or 2");
  if (kmeans_max_iter < 1) throw InvalidParameter("ifl: kmeans_max_iter must be >= 1");
}

ClassModel build_class_model(const Matrix& group_rows, int class_id, const IflConfig& cfg, std::uint64_t seed) {
  if (group_rows.rows() == 0) throw InvalidParameter("build_class_model: empty class group");
  Clustering clustering = kmeans(group_rows, cfg.k, cfg.metric_l1, seed, {cfg.kmeans_max_iter});
  ClassModel model;
  model.class_id = class_id;
  model.class_size = group_rows.rows();
  model.group_sum = column_sum(group_rows);
  model.group_mean = divide(model.group_sum, model.class_size);
  model.clusters = summarize(group_rows, clustering);
  return model;
}

TrialOutcome trial_strategy1(const ClassModel& model, const Matrix& group_rows, std::span<const double> x,
                             const IflConfig& cfg) {
  if (model.clusters.empty() || model.class_size != group_rows.rows())
    throw InvalidParameter("trial_strategy1: model does not match its class rows");
  check_width(x, group_rows.cols(), "trial_strategy1");
  const std::size_t s = model.class_size;

  std::size_t closest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < model.clusters.size(); ++a) {
    const double d = distance(cfg.metric_l2, x, model.clusters[a].centroid);
    if (d < best) {
      best = d;
      closest = a;
    }
  }

  TrialOutcome out;
  out.class_id = model.class_id;
  out.strategy = 1;
  out.source_index = closest;
  out.updated_clusters = model.clusters;
  auto& target = out.updated_clusters[closest];
  target.members.push_back(s);
  target.mean = mean_with(target.member_sum, x, target.size());
  for (std::size_t j = 0; j < x.size(); ++j) target.member_sum[j] += x[j];
  target.centroid = target.mean;
  for (auto& c : out.updated_clusters) c.confidence = static_cast<double>(c.size()) / static_cast<double>(s + 1);

  out.updated_group_mean = cfg.mean_scope == MeanScope::closest_cluster ? target.mean
                                                                        : mean_with(model.group_sum, x, s + 1);

  std::vector<std::size_t> order(out.updated_clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.updated_clusters[a].size() > out.updated_clusters[b].size();
  });
  std::vector<ClusterSummary> sorted;
  sorted.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == closest) out.closest_index = i;
    sorted.push_back(std::move(out.updated_clusters[order[i]]));
  }
  out.updated_clusters = std::move(sorted);
  return out;
}

TrialOutcome trial_strategy2(const Matrix& group_rows, std::span<const double> x, int class_id,
                             const IflConfig& cfg, std::uint64_t seed) {
  if (group_rows.rows() == 0) throw InvalidParameter("trial_strategy2: empty class group");
  check_width(x, group_rows.cols(), "trial_strategy2");
  const std::size_t s = group_rows.rows();
  Matrix points = group_rows;
  points.push_row(x);

  Clustering clustering = kmeans(points, cfg.k, cfg.metric_l2, seed, {cfg.kmeans_max_iter});
  TrialOutcome out;
  out.class_id = class_id;
  out.strategy = 2;
  out.updated_clusters = summarize(points, clustering);
  for (std::size_t a = 0; a < out.updated_clusters.size(); ++a) {
    const auto& members = out.updated_clusters[a].members;
    if (!members.empty() && members.back() == s) out.closest_index = a;
  }
  if (cfg.mean_scope == MeanScope::closest_cluster) {
    out.updated_group_mean = out.updated_clusters[out.closest_index].mean;
  } else {
    out.updated_group_mean = divide(column_sum(points), s + 1);
  }
  return out;
}

std::vector<double> compute_error_features(const ClassModel& model, const TrialOutcome& outcome,
                                           const Matrix& group_rows, std::span<const double> x,
                                           const IflConfig& cfg, TrialDiagnostics* diagnostics) {
  if (model.class_id != outcome.class_id)
    throw InvalidParameter("compute_error_features: model and trial refer to different classes");
  if (outcome.updated_clusters.empty() || outcome.closest_index >= outcome.updated_clusters.size())
    throw InvalidParameter("compute_error_features: trial has no closest cluster");
  check_width(x, group_rows.cols(), "compute_error_features");

  const Metric metric = cfg.layer3_metric();
  const std::size_t k = cfg.k;
  const std::size_t s = group_rows.rows();
  const auto& before = model.clusters;
  const auto& after = outcome.updated_clusters;
  const auto& closest = after[outcome.closest_index];
  const std::size_t common = std::min(before.size(), after.size());
  const std::size_t widest = std::max(before.size(), after.size());

  TrialDiagnostics diag;
  std::vector<double> out;
  out.reserve(cfg.features.length(k));
  for (Feature f : cfg.features.members()) {
    switch (f) {
      case Feature::nearest_member: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t idx : closest.members)
          if (idx != s) best = std::min(best, distance(metric, x, group_rows.row(idx)));
        if (best == std::numeric_limits<double>::infinity()) {
          diag.nearest_member_fallback = true;
          for (std::size_t idx = 0; idx < s; ++idx) best = std::min(best, distance(metric, x, group_rows.row(idx)));
        }
        out.push_back(best);
        break;
      }
      case Feature::updated_mean:
        out.push_back(distance(metric, x, outcome.updated_group_mean));
        break;
      case Feature::updated_centroids:
        for (std::size_t a = 0; a < k; ++a) out.push_back(a < after.size() ? distance(metric, x, after[a].centroid) : 0.0);
        break;
      case Feature::updated_means:
        for (std::size_t a = 0; a < k; ++a) out.push_back(a < after.size() ? distance(metric, x, after[a].mean) : 0.0);
        break;
      case Feature::mean_shift:
        out.push_back(distance(metric, model.group_mean, outcome.updated_group_mean));
        break;
      case Feature::centroid_shift:
        for (std::size_t a = 0; a < k; ++a)
          out.push_back(a < common ? distance(metric, before[a].centroid, after[a].centroid) : 0.0);
        break;
      case Feature::confidence_shift:
        for (std::size_t a = 0; a < k; ++a)
          out.push_back(a < common ? scalar_distance(before[a].confidence, after[a].confidence) : 0.0);
        break;
      case Feature::cluster_mean_shift:
        for (std::size_t a = 0; a < k; ++a) out.push_back(a < common ? distance(metric, before[a].mean, after[a].mean) : 0.0);
        break;
    }
  }
  const bool uses_set2 = cfg.features.contains(Feature::centroid_shift) ||
                         cfg.features.contains(Feature::confidence_shift) ||
                         cfg.features.contains(Feature::cluster_mean_shift);
  if (uses_set2) diag.padded_ranks = widest - common;
  if (diagnostics) *diagnostics = diag;
  return out;
}

std::vector<double> embed_class(std::span<const std::vector<double>> per_class, std::span<const double> multipliers) {
  if (multipliers.size() != per_class.size())
    throw InvalidParameter("embed_class: " + std::to_string(multipliers.size()) + " multipliers for " +
                           std::to_string(per_class.size()) + " classes");
  std::vector<double> out;
  const std::size_t len = per_class.empty() ? 0 : per_class.front().size();
  out.reserve(per_class.size() * len);
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].size() != len) throw InvalidParameter("embed_class: per-class blocks differ in length");
    for (double v : per_class[c]) out.push_back(multipliers[c] * v);
  }
  return out;
}

std::vector<std::string> learned_column_names(std::size_t m, const IflConfig& cfg) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < m; ++c) {
    const std::string prefix = "ifl_c" + std::to_string(c + 1) + "_";
    for (Feature f : cfg.features.members()) {
      const std::string id(kFeatureIds[static_cast<std::size_t>(f)]);
      if (is_per_cluster(f)) {
        for (std::size_t a = 0; a < cfg.k; ++a) names.push_back(prefix + id + "_" + std::to_string(a + 1));
      } else {
        names.push_back(prefix + id);
      }
    }
  }
  return names;
}

Augmented learn_train_features(const Dataset& train, const IflConfig& cfg) {
  cfg.validate();
  return learn_train_features(train, stratified_folds(train, cfg.r, cfg.seed), cfg);
}

Augmented learn_train_features(const Dataset& train, const FoldPlan& plan, const IflConfig& cfg) {
  cfg.validate();
  const std::size_t n = train.size();
  const std::size_t h = train.width();
  const std::size_t m = train.num_classes();
  validate_plan(plan, n);
  const auto multipliers = cfg.multipliers_for(m);
  const std::size_t width = h + m * cfg.features.length(cfg.k);

  Augmented result;
  result.features = Matrix(n, width);
  result.column_names = original_names(train);
  auto learned = learned_column_names(m, cfg);
  result.column_names.insert(result.column_names.end(), learned.begin(), learned.end());

  std::vector<RowStats> stats(n);
  std::vector<std::optional<ClassModel>> models;
  std::vector<Matrix> group_rows;
  for (std::size_t j = 0; j < plan.size(); ++j) {
    const auto inner_train = plan.complement(j);
    build_models(train, inner_train, cfg, j, models, group_rows);
    for (std::size_t c = 0; c < m; ++c)
      if (!models[c] && !plan.folds[j].empty())
        result.diagnostics.warnings.push_back("inner fold " + std::to_string(j + 1) + " has no training rows of class '" +
                                              train.label_names[c] + "'; its learned features are zero there");
    const auto& held_out = plan.folds[j];
    parallel_for(held_out.size(), cfg.jobs, [&](std::size_t t) {
      const std::size_t i = held_out[t];
      stats[i] = augment_row(train.features.row(i), result.features.row(i), h, models, group_rows, multipliers, cfg, j, i);
    });
  }
  finish_diagnostics(result.diagnostics, stats);
  return result;
}

Augmented learn_test_features(const Dataset& train, const Matrix& test_rows, const IflConfig& cfg) {
  cfg.validate();
  const std::size_t h = train.width();
  const std::size_t m = train.num_classes();
  if (test_rows.rows() > 0 && test_rows.cols() != h)
    throw InvalidParameter("learn_test_features: test width " + std::to_string(test_rows.cols()) +
                           " != training width " + std::to_string(h));
  const auto multipliers = cfg.multipliers_for(m);
  const std::size_t width = h + m * cfg.features.length(cfg.k);

  Augmented result;
  result.features = Matrix(test_rows.rows(), width);
  result.column_names = original_names(train);
  auto learned = learned_column_names(m, cfg);
  result.column_names.insert(result.column_names.end(), learned.begin(), learned.end());
  if (test_rows.rows() == 0) return result;

  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::optional<ClassModel>> models;
  std::vector<Matrix> group_rows;
  build_models(train, all, cfg, kNoIndex, models, group_rows);
  for (std::size_t c = 0; c < m; ++c)
    if (!models[c])
      result.diagnostics.warnings.push_back("training set has no rows of class '" + train.label_names[c] +
                                            "'; its learned features are zero");

  std::vector<RowStats> stats(test_rows.rows());
  parallel_for(test_rows.rows(), cfg.jobs, [&](std::size_t i) {
    stats[i] = augment_row(test_rows.row(i), result.features.row(i), h, models, group_rows, multipliers, cfg,
                           kNoIndex, i);
  });
  finish_diagnostics(result.diagnostics, stats);
  return result;
}

}  // namespace ifl
