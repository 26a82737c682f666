#include "ifl/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ifl/error.hpp"
#include "ifl/log.hpp"

namespace ifl {
namespace {

using SortedLists = std::vector<std::vector<std::uint32_t>>;

void check_training_inputs(const Matrix& x, std::span<const int> y, std::size_t num_classes, const char* where) {
  if (x.rows() == 0) throw InvalidParameter(std::string(where) + ": no training rows");
  if (x.rows() != y.size()) throw InvalidParameter(std::string(where) + ": row count does not match label count");
  if (x.cols() == 0) throw InvalidParameter(std::string(where) + ": no feature columns");
  for (int label : y)
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
      throw InvalidParameter(std::string(where) + ": label out of range");
}

void check_width(std::size_t expected, const Matrix& x, const char* where) {
  if (x.rows() > 0 && x.cols() != expected)
    throw InvalidParameter(std::string(where) + ": feature width " + std::to_string(x.cols()) +
                           " does not match model width " + std::to_string(expected));
}

SortedLists presort(const Matrix& x) {
  SortedLists lists(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& list = lists[f];
    list.resize(x.rows());
    std::iota(list.begin(), list.end(), std::uint32_t{0});
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }
  return lists;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, std::size_t m, const TreeParams& params,
              std::span<const double> weights)
      : x_(x), y_(y), m_(m), params_(params), weights_(weights), goes_left_(x.rows(), 0) {}

  std::vector<TreeNode> run(SortedLists lists) {
    build(std::move(lists), 0);
    return std::move(nodes_);
  }

 private:
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }

  int build(SortedLists lists, std::size_t depth) {
    const auto& samples = lists[0];
    const std::size_t count = samples.size();
    std::vector<double> dist(m_, 0.0);
    std::vector<std::size_t> counts(m_, 0);
    double total = 0.0;
    for (std::uint32_t i : samples) {
      dist[static_cast<std::size_t>(y_[i])] += weight(i);
      ++counts[static_cast<std::size_t>(y_[i])];
      total += weight(i);
    }

    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    {
      auto& leaf = nodes_.back().distribution;
      leaf.resize(m_);
      for (std::size_t c = 0; c < m_; ++c)
        leaf[c] = total > 0.0 ? dist[c] / total : static_cast<double>(counts[c]) / static_cast<double>(count);
    }

    const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (present <= 1) return id;
    if (params_.max_depth > 0 && depth >= params_.max_depth) return id;
    if (count < std::max<std::size_t>(params_.min_parent, 2) || count < 2 * params_.min_leaf) return id;

    int best_feature = -1;
    std::size_t best_left = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<double> left(m_);
    for (std::size_t f = 0; f < lists.size(); ++f) {
      const auto& list = lists[f];
      std::fill(left.begin(), left.end(), 0.0);
      double wl = 0.0;
      for (std::size_t p = 0; p + 1 < count; ++p) {
        const std::uint32_t i = list[p];
        left[static_cast<std::size_t>(y_[i])] += weight(i);
        wl += weight(i);
        const std::size_t nl = p + 1;
        if (x_(i, f) == x_(list[p + 1], f)) continue;
        if (nl < params_.min_leaf || count - nl < params_.min_leaf) continue;
        const double wr = total - wl;
        double sl = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < m_; ++c) {
          sl += left[c] * left[c];
          const double rc = dist[c] - left[c];
          sr += rc * rc;
        }
        const double score = (wl > 0.0 ? sl / wl : 0.0) + (wr > 0.0 ? sr / wr : 0.0);
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_left = nl;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto& split_list = lists[static_cast<std::size_t>(best_feature)];
    const double lo = x_(split_list[best_left - 1], static_cast<std::size_t>(best_feature));
    const double hi = x_(split_list[best_left], static_cast<std::size_t>(best_feature));
    double threshold = lo + (hi - lo) / 2.0;
    if (!(threshold < hi)) threshold = lo;

    for (std::uint32_t i : samples) goes_left_[i] = x_(i, static_cast<std::size_t>(best_feature)) <= threshold;
    SortedLists left_lists(lists.size()), right_lists(lists.size());
    for (std::size_t f = 0; f < lists.size(); ++f) {
      left_lists[f].reserve(best_left);
      right_lists[f].reserve(count - best_left);
      for (std::uint32_t i : lists[f]) (goes_left_[i] ? left_lists[f] : right_lists[f]).push_back(i);
    }
    lists.clear();
    lists.shrink_to_fit();

    nodes_[static_cast<std::size_t>(id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(id)].threshold = threshold;
    const int l = build(std::move(left_lists), depth + 1);
    const int r = build(std::move(right_lists), depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t m_;
  TreeParams params_;
  std::span<const double> weights_;
  std::vector<char> goes_left_;
  std::vector<TreeNode> nodes_;
};

DecisionTree build_tree(const Matrix& x, std::span<const int> y, std::size_t m, const TreeParams& params,
                        std::span<const double> weights, SortedLists lists) {
  TreeBuilder builder(x, y, m, params, weights);
  return DecisionTree(builder.run(std::move(lists)), m, x.cols());
}

std::vector<double> softmax_from_log(std::vector<double> logp) {
  const double top = *std::max_element(logp.begin(), logp.end());
  double sum = 0.0;
  for (double& v : logp) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : logp) v /= sum;
  return logp;
}

template <typename RowModel>
Predictions predict_rows(const RowModel& model, const Matrix& x, std::size_t m) {
  Predictions out;
  out.labels.reserve(x.rows());
  out.probabilities = Matrix(x.rows(), m);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto p = model.predict_proba(x.row(r));
    std::copy(p.begin(), p.end(), out.probabilities.row(r).begin());
    out.labels.push_back(static_cast<int>(argmax(p)));
  }
  return out;
}

}  // namespace

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

// ---------------------------------------------------------------------------
// Decision tree

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t num_classes, std::size_t width)
    : nodes_(std::move(nodes)), num_classes_(num_classes), width_(width) {
  if (nodes_.empty()) throw InvalidParameter("DecisionTree: no nodes");
}

std::span<const double> DecisionTree::predict_proba(std::span<const double> row) const {
  std::size_t node = 0;
  while (!nodes_[node].is_leaf()) {
    const auto& n = nodes_[node];
    node = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[node].distribution;
}

Predictions DecisionTree::predict(const Matrix& x) const {
  check_width(width_, x, "DecisionTree::predict");
  return predict_rows(*this, x, num_classes_);
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::size_t num_classes, const TreeParams& params,
                      std::span<const double> weights) {
  check_training_inputs(x, y, num_classes, "fit_tree");
  if (!weights.empty() && weights.size() != x.rows()) throw InvalidParameter("fit_tree: weight count mismatch");
  if (params.min_leaf < 1) throw InvalidParameter("fit_tree: min_leaf must be >= 1");
  return build_tree(x, y, num_classes, params, weights, presort(x));
}

// ---------------------------------------------------------------------------
// Boosting

BoostedEnsemble::BoostedEnsemble(std::vector<Learner> learners, std::vector<double> prior, std::size_t width)
    : learners_(std::move(learners)), prior_(std::move(prior)), width_(width) {}

std::vector<double> BoostedEnsemble::predict_proba(std::span<const double> row) const {
  if (learners_.empty()) return prior_;
  std::vector<double> score(prior_.size(), 0.0);
  double total = 0.0;
  for (const auto& l : learners_) {
    score[static_cast<std::size_t>(l.tree.predict(row))] += l.weight;
    total += l.weight;
  }
  for (double& v : score) v /= total;
  return score;
}

Predictions BoostedEnsemble::predict(const Matrix& x) const {
  check_width(width_, x, "BoostedEnsemble::predict");
  return predict_rows(*this, x, prior_.size());
}

BoostedEnsemble fit_boosted(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                            const BoostParams& params) {
  check_training_inputs(x, y, num_classes, "fit_boosted");
  if (params.n_learners == 0) throw InvalidParameter("fit_boosted: n_learners must be >= 1");
  if (!(params.learning_rate > 0.0)) throw InvalidParameter("fit_boosted: learning_rate must be > 0");
  const std::size_t n = x.rows();
  std::vector<double> prior(num_classes, 0.0);
  for (int label : y) prior[static_cast<std::size_t>(label)] += 1.0;
  if (std::count_if(prior.begin(), prior.end(), [](double v) { return v > 0.0; }) < 2)
    throw ValidationError("fit_boosted: training labels contain a single class");
  for (double& v : prior) v /= static_cast<double>(n);

  const double m = static_cast<double>(num_classes);
  const double error_limit = 1.0 - 1.0 / m;
  const SortedLists sorted = presort(x);
  const TreeParams tree_params{params.max_depth, params.min_leaf, 2};
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<BoostedEnsemble::Learner> learners;
  std::vector<double> errors;

  for (std::size_t t = 0; t < params.n_learners; ++t) {
    DecisionTree tree = build_tree(x, y, num_classes, tree_params, w, sorted);
    std::vector<char> miss(n, 0);
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      miss[i] = tree.predict(x.row(i)) != y[i];
      if (miss[i]) err += w[i];
      total += w[i];
    }
    err /= total;
    if (err >= error_limit) break;
    if (err <= 0.0) {
      constexpr double kTiny = 1e-10;
      learners.push_back({std::move(tree), params.learning_rate * (std::log((1.0 - kTiny) / kTiny) + std::log(m - 1.0))});
      errors.push_back(0.0);
      break;
    }
    const double alpha = params.learning_rate * (std::log((1.0 - err) / err) + std::log(m - 1.0));
    learners.push_back({std::move(tree), alpha});
    errors.push_back(err);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (double& v : w) v /= sum;
  }
  BoostedEnsemble ensemble(std::move(learners), std::move(prior), x.cols());
  ensemble.learner_errors = std::move(errors);
  return ensemble;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

NaiveBayes::NaiveBayes(std::vector<double> log_prior, Matrix means, Matrix variances)
    : log_prior_(std::move(log_prior)), means_(std::move(means)), variances_(std::move(variances)) {}

std::vector<double> NaiveBayes::predict_proba(std::span<const double> row) const {
  constexpr double kLog2Pi = 1.8378770664093453;
  std::vector<double> logp(log_prior_.size());
  for (std::size_t c = 0; c < log_prior_.size(); ++c) {
    if (!std::isfinite(log_prior_[c])) {
      logp[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double lp = log_prior_[c];
    for (std::size_t f = 0; f < row.size(); ++f) {
      const double var = variances_(c, f);
      const double d = row[f] - means_(c, f);
      lp -= 0.5 * (kLog2Pi + std::log(var) + d * d / var);
    }
    logp[c] = lp;
  }
  return softmax_from_log(std::move(logp));
}

Predictions NaiveBayes::predict(const Matrix& x) const {
  check_width(width(), x, "NaiveBayes::predict");
  return predict_rows(*this, x, num_classes());
}

NaiveBayes fit_naive_bayes(const Matrix& x, std::span<const int> y, std::size_t num_classes,
                           const NaiveBayesParams& params) {
  check_training_inputs(x, y, num_classes, "fit_naive_bayes");
  const std::size_t h = x.cols();
  Matrix means(num_classes, h), vars(num_classes, h);
  std::vector<double> counts(num_classes, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    counts[c] += 1.0;
    for (std::size_t f = 0; f < h; ++f) means(c, f) += x(i, f);
  }
  for (std::size_t c = 0; c < num_classes; ++c)
    for (std::size_t f = 0; f < h; ++f) means(c, f) = counts[c] > 0 ? means(c, f) / counts[c] : 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t f = 0; f < h; ++f) {
      const double d = x(i, f) - means(c, f);
      vars(c, f) += d * d;
    }
  }
  std::size_t floored = 0;
  for (std::size_t c = 0; c < num_classes; ++c)
    for (std::size_t f = 0; f < h; ++f) {
      vars(c, f) = counts[c] > 1 ? vars(c, f) / (counts[c] - 1.0) : 0.0;
      if (vars(c, f) < params.variance_floor) {
        vars(c, f) = params.variance_floor;
        if (counts[c] > 0) ++floored;
      }
    }
  if (floored > 0)
    log::warn("naive Bayes: " + std::to_string(floored) + " near-zero variance(s) raised to the floor");
  std::vector<double> log_prior(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c)
    log_prior[c] = counts[c] > 0 ? std::log(counts[c] / static_cast<double>(x.rows()))
                                 : -std::numeric_limits<double>::infinity();
  NaiveBayes model(std::move(log_prior), std::move(means), std::move(vars));
  model.floored = floored;
  return model;
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

Knn::Knn(Matrix x, std::vector<int> y, std::size_t num_classes, KnnParams params,
         std::optional<Standardizer> scaling)
    : x_(std::move(x)), y_(std::move(y)), num_classes_(num_classes), params_(params), scaling_(std::move(scaling)) {}

std::vector<double> Knn::predict_proba(std::span<const double> raw) const {
  std::vector<double> scaled;
  if (scaling_) scaled = scaling_->transform(raw);
  const std::span<const double> row = scaling_ ? std::span<const double>(scaled) : raw;
  const std::size_t n = x_.rows();
  const std::size_t k = std::min(params_.neighbors, n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = {distance(params_.metric, row, x_.row(i)), i};
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<double> votes(num_classes_, 0.0);
  for (std::size_t i = 0; i < k; ++i) votes[static_cast<std::size_t>(y_[dist[i].second])] += 1.0;
  for (double& v : votes) v /= static_cast<double>(k);
  return votes;
}

Predictions Knn::predict(const Matrix& x) const {
  check_width(width(), x, "Knn::predict");
  return predict_rows(*this, x, num_classes_);
}

Knn fit_knn(const Matrix& x, std::span<const int> y, std::size_t num_classes, const KnnParams& params) {
  check_training_inputs(x, y, num_classes, "fit_knn");
  if (params.neighbors == 0) throw InvalidParameter("fit_knn: neighbors must be >= 1");
  std::vector<int> targets(y.begin(), y.end());
  if (!params.standardize) return Knn(x, std::move(targets), num_classes, params);
  Standardizer scaling = Standardizer::fit(x);
  Matrix scaled = scaling.transform(x);
  return Knn(std::move(scaled), std::move(targets), num_classes, params, std::move(scaling));
}

// ---------------------------------------------------------------------------
// Uniform interface

ClassifierKind parse_classifier_kind(std::string_view text) {
  if (text == "naive_bayes" || text == "nb") return ClassifierKind::naive_bayes;
  if (text == "knn") return ClassifierKind::knn;
  if (text == "tree" || text == "decision_tree") return ClassifierKind::tree;
  if (text == "boosted" || text == "ensemble") return ClassifierKind::boosted;
  throw InvalidParameter("unknown classifier '" + std::string(text) + "'");
}

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::naive_bayes: return "naive_bayes";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::tree: return "tree";
    case ClassifierKind::boosted: return "boosted";
  }
  return "?";
}

Model fit(const ClassifierConfig& config, const Matrix& x, std::span<const int> y, std::size_t num_classes) {
  switch (config.kind) {
    case ClassifierKind::naive_bayes: return fit_naive_bayes(x, y, num_classes, config.naive_bayes);
    case ClassifierKind::knn: return fit_knn(x, y, num_classes, config.knn);
    case ClassifierKind::tree: return fit_tree(x, y, num_classes, config.tree);
    case ClassifierKind::boosted: return fit_boosted(x, y, num_classes, config.boost);
  }
  throw InvalidParameter("fit: unknown classifier kind");
}

Predictions predict(const Model& model, const Matrix& x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

Matrix matrix_from(const json& j) {
  Matrix m;
  for (const auto& row : j) m.push_row(row.get<std::vector<double>>());
  return m;
}

json tree_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes())
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                     {"distribution", n.distribution}});
  return {{"num_classes", tree.num_classes()}, {"width", tree.width()}, {"nodes", nodes}};
}

DecisionTree tree_from(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes"))
    nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                     n.at("right").get<int>(), n.at("distribution").get<std::vector<double>>()});
  return DecisionTree(std::move(nodes), j.at("num_classes").get<std::size_t>(), j.at("width").get<std::size_t>());
}

}  // namespace

std::string save_model_json(const Model& model) {
  json j;
  j["schema"] = "ifl.model/1";
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DecisionTree>) {
          j["kind"] = "tree";
          j["tree"] = tree_json(m);
        } else if constexpr (std::is_same_v<T, BoostedEnsemble>) {
          j["kind"] = "boosted";
          j["prior"] = m.prior();
          j["width"] = m.width();
          json learners = json::array();
          for (const auto& l : m.learners()) learners.push_back({{"weight", l.weight}, {"tree", tree_json(l.tree)}});
          j["learners"] = learners;
        } else if constexpr (std::is_same_v<T, NaiveBayes>) {
          j["kind"] = "naive_bayes";
          json lp = json::array();
          for (double v : m.log_prior()) lp.push_back(std::isfinite(v) ? json(v) : json(nullptr));
          j["log_prior"] = lp;
          j["means"] = matrix_json(m.means());
          j["variances"] = matrix_json(m.variances());
        } else {
          j["kind"] = "knn";
          j["neighbors"] = m.params().neighbors;
          j["metric"] = m.params().metric.to_string();
          j["standardize"] = m.params().standardize;
          if (m.scaling()) {
            j["scaling_mean"] = m.scaling()->mean();
            j["scaling_scale"] = m.scaling()->scale();
          }
          j["num_classes"] = m.num_classes();
          j["points"] = matrix_json(m.points());
          j["targets"] = m.targets();
        }
      },
      model);
  return j.dump(2);
}

Model load_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("model json: ") + e.what());
  }
  try {
    if (j.value("schema", "") != "ifl.model/1") throw MalformedInput("model json: unsupported schema");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "tree") return tree_from(j.at("tree"));
    if (kind == "boosted") {
      std::vector<BoostedEnsemble::Learner> learners;
      for (const auto& l : j.at("learners")) learners.push_back({tree_from(l.at("tree")), l.at("weight").get<double>()});
      return BoostedEnsemble(std::move(learners), j.at("prior").get<std::vector<double>>(), j.at("width").get<std::size_t>());
    }
    if (kind == "naive_bayes") {
      std::vector<double> lp;
      for (const auto& v : j.at("log_prior"))
        lp.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
      return NaiveBayes(std::move(lp), matrix_from(j.at("means")), matrix_from(j.at("variances")));
    }
    if (kind == "knn") {
      KnnParams params{j.at("neighbors").get<std::size_t>(), Metric::parse(j.at("metric").get<std::string>()),
                       j.value("standardize", false)};
      std::optional<Standardizer> scaling;
      if (params.standardize)
        scaling.emplace(j.at("scaling_mean").get<std::vector<double>>(),
                        j.at("scaling_scale").get<std::vector<double>>());
      return Knn(matrix_from(j.at("points")), j.at("targets").get<std::vector<int>>(),
                 j.at("num_classes").get<std::size_t>(), params, std::move(scaling));
    }
    throw MalformedInput("model json: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("model json: ") + e.what());
  }
}

}  // namespace ifl
