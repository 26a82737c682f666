#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ifl/classifiers.hpp"
#include "ifl/error.hpp"
#include "ifl/metrics.hpp"
#include "synthetic.hpp"

namespace {

using ifl::Matrix;
using Labels = std::vector<int>;

Matrix column(const std::vector<double>& values) {
  Matrix m;
  for (double v : values) m.push_row(std::vector<double>{v});
  return m;
}

double accuracy(const ifl::Predictions& p, const Labels& y) { return ifl::score(p.labels, y).accuracy; }

TEST(Tree, SeparableOneDimensional) {
  const Matrix x = column({0, 1, 10, 11});
  const Labels y = {0, 0, 1, 1};
  const auto tree = ifl::fit_tree(x, y, 2, {});
  ASSERT_EQ(tree.nodes().size(), 3u);
  EXPECT_EQ(tree.nodes()[0].feature, 0);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].threshold, 5.5);
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_DOUBLE_EQ(accuracy(tree.predict(x), y), 1.0);
}

TEST(Tree, IdenticalRowsGiveMajorityLeaf) {
  const Matrix x = column({3, 3, 3, 3, 3});
  const Labels y = {1, 0, 1, 2, 1};
  const auto tree = ifl::fit_tree(x, y, 3, {});
  ASSERT_EQ(tree.nodes().size(), 1u);
  EXPECT_EQ(tree.predict(x.row(0)), 1);
  const auto p = tree.predict_proba(x.row(0));
  EXPECT_DOUBLE_EQ(p[0], 0.2);
  EXPECT_DOUBLE_EQ(p[1], 0.6);
}

TEST(Tree, PureInputIsDepthZeroLeaf) {
  const auto tree = ifl::fit_tree(column({1, 2, 3}), Labels{1, 1, 1}, 2, {});
  EXPECT_EQ(tree.depth(), 0u);
  EXPECT_TRUE(tree.nodes()[0].is_leaf());
}

TEST(Tree, EmptyDataThrows) {
  EXPECT_THROW(ifl::fit_tree(Matrix(0, 2), Labels{}, 2, {}), ifl::InvalidParameter);
  EXPECT_THROW(ifl::fit_tree(column({1, 2}), Labels{0}, 2, {}), ifl::InvalidParameter);
}

TEST(Tree, UnlimitedDepthReproducesTrainingLabels) {
  const auto d = ifl::testing::make_blobs(120, 3, 3, 0.5, 4);
  const auto tree = ifl::fit_tree(d.features, d.labels, 3, {});
  EXPECT_DOUBLE_EQ(accuracy(tree.predict(d.features), d.labels), 1.0);
}

TEST(Tree, DepthLimitRespected) {
  const auto d = ifl::testing::make_blobs(200, 4, 4, 0.3, 8);
  for (std::size_t depth = 1; depth <= 4; ++depth) {
    ifl::TreeParams p;
    p.max_depth = depth;
    const auto tree = ifl::fit_tree(d.features, d.labels, 4, p);
    EXPECT_LE(tree.depth(), depth);
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf()) continue;
      double sum = 0;
      for (double v : node.distribution) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Tree, MonotoneTransformInvariance) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const auto train = ifl::testing::make_blobs(80, 3, 3, 0.8, rng());
    const auto test = ifl::testing::make_blobs(40, 3, 3, 0.8, rng());
    const std::size_t col = rng() % 3;
    auto warp = [&](Matrix m) {
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, col) = std::exp(m(i, col) / 4.0) * 3.0 + 1.0;
      return m;
    };
    ifl::TreeParams p;
    p.max_depth = 4;
    const auto plain = ifl::fit_tree(train.features, train.labels, 3, p).predict(test.features);
    const auto warped = ifl::fit_tree(warp(train.features), train.labels, 3, p).predict(warp(test.features));
    EXPECT_EQ(plain.labels, warped.labels);
  }
}

TEST(Predict, EmptyInputAndDeterminism) {
  const auto d = ifl::testing::make_blobs(60, 2, 2, 2.0, 1);
  ifl::ClassifierConfig cfg;
  for (auto kind : {ifl::ClassifierKind::naive_bayes, ifl::ClassifierKind::knn, ifl::ClassifierKind::tree,
                    ifl::ClassifierKind::boosted}) {
    cfg.kind = kind;
    const auto model = ifl::fit(cfg, d.features, d.labels, 2);
    EXPECT_TRUE(ifl::predict(model, Matrix(0, 2)).labels.empty());
    const auto a = ifl::predict(model, d.features);
    const auto b = ifl::predict(model, d.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.probabilities, b.probabilities);
    EXPECT_THROW(ifl::predict(model, Matrix(3, 5)), ifl::InvalidParameter);
  }
}

TEST(Boosted, SeparableWithinTenLearners) {
  const auto d = ifl::testing::make_blobs(100, 2, 2, 8.0, 3);
  ifl::BoostParams p;
  p.n_learners = 10;
  const auto model = ifl::fit_boosted(d.features, d.labels, 2, p);
  EXPECT_LE(model.learner_count(), 10u);
  EXPECT_DOUBLE_EQ(accuracy(model.predict(d.features), d.labels), 1.0);
}

TEST(Boosted, XorNeedsTheEnsemble) {
  const auto d = ifl::testing::make_xor(200, 9);
  ifl::TreeParams stump;
  stump.max_depth = 1;
  const double single = accuracy(ifl::fit_tree(d.features, d.labels, 2, stump).predict(d.features), d.labels);
  EXPECT_LT(single, 0.75);

  ifl::BoostParams p;
  p.n_learners = 50;
  p.max_depth = 2;
  const auto model = ifl::fit_boosted(d.features, d.labels, 2, p);
  EXPECT_GT(accuracy(model.predict(d.features), d.labels), 0.9);
}

TEST(Boosted, SingleLearnerMatchesItsTree) {
  const auto d = ifl::testing::make_blobs(90, 3, 3, 1.0, 6);
  ifl::BoostParams p;
  p.n_learners = 1;
  p.max_depth = 3;
  const auto model = ifl::fit_boosted(d.features, d.labels, 3, p);
  ASSERT_EQ(model.learner_count(), 1u);
  ifl::TreeParams tp;
  tp.max_depth = 3;
  const auto tree = ifl::fit_tree(d.features, d.labels, 3, tp);
  EXPECT_EQ(model.predict(d.features).labels, tree.predict(d.features).labels);
}

TEST(Boosted, AcceptedLearnersBeatChance) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 2 + rng() % 3;
    const auto d = ifl::testing::make_blobs(120, 3, m, 0.7, rng());
    ifl::BoostParams p;
    p.n_learners = 30;
    p.max_depth = 1 + rng() % 3;
    const auto model = ifl::fit_boosted(d.features, d.labels, m, p);
    ASSERT_EQ(model.learner_errors.size(), model.learner_count());
    for (double e : model.learner_errors) EXPECT_LT(e, 1.0 - 1.0 / static_cast<double>(m));
    for (const auto& l : model.learners()) EXPECT_TRUE(std::isfinite(l.weight));
  }
}

TEST(Boosted, SingleClassRejected) {
  EXPECT_THROW(ifl::fit_boosted(column({1, 2, 3}), Labels{0, 0, 0}, 2, {}), ifl::ValidationError);
}

TEST(NaiveBayes, SeparatedBlobsGeneralise) {
  const auto train = ifl::testing::make_blobs(200, 2, 2, 5.0, 1);
  const auto test = ifl::testing::make_blobs(200, 2, 2, 5.0, 2);
  const auto nb = ifl::fit_naive_bayes(train.features, train.labels, 2);
  EXPECT_GT(accuracy(nb.predict(test.features), test.labels), 0.95);
}

TEST(NaiveBayes, ConstantFeatureIsFloored) {
  Matrix x;
  for (int i = 0; i < 10; ++i) x.push_row(std::vector<double>{1.0, static_cast<double>(i % 2 ? i : -i)});
  Labels y;
  for (int i = 0; i < 10; ++i) y.push_back(i % 2);
  const auto nb = ifl::fit_naive_bayes(x, y, 2);
  EXPECT_GE(nb.floored, 2u);
  const auto p = nb.predict(x);
  for (double v : p.probabilities.data()) EXPECT_TRUE(std::isfinite(v));
  Matrix probe;
  probe.push_row(std::vector<double>{2.0, 5.0});
  for (double v : nb.predict(probe).probabilities.data()) EXPECT_FALSE(std::isnan(v));
}

TEST(Knn, OneNeighbourReturnsOwnLabel) {
  const auto d = ifl::testing::make_blobs(50, 3, 3, 0.2, 5);
  const auto knn = ifl::fit_knn(d.features, d.labels, 3, {1, ifl::Metric::euclidean()});
  EXPECT_EQ(knn.predict(d.features).labels, d.labels);
}

TEST(Knn, VoteTieGoesToLowestClass) {
  const Matrix x = column({0, 1, 2, 3});
  const auto knn = ifl::fit_knn(x, Labels{1, 0, 1, 0}, 2, {4, ifl::Metric::euclidean()});
  EXPECT_EQ(knn.predict(column({1.5})).labels[0], 0);
}

TEST(Knn, StandardizedVotesIgnoreColumnScale) {
  const auto d = ifl::testing::make_blobs(60, 3, 2, 1.0, 8);
  Matrix stretched = d.features;
  for (std::size_t r = 0; r < stretched.rows(); ++r) {
    stretched(r, 0) = 1000.0 * stretched(r, 0) + 7.0;
    stretched(r, 2) *= 0.001;
  }
  const ifl::KnnParams params{3, ifl::Metric::euclidean(), true};
  const auto a = ifl::fit_knn(d.features, d.labels, 2, params).predict(d.features);
  const auto b = ifl::fit_knn(stretched, d.labels, 2, params).predict(stretched);
  EXPECT_EQ(a.labels, b.labels);
  // Without standardisation the stretched column dominates.
  const auto raw = ifl::fit_knn(stretched, d.labels, 2, {3, ifl::Metric::euclidean()}).predict(stretched);
  EXPECT_NE(raw.labels, a.labels);
}

TEST(Classifier, ParseKind) {
  EXPECT_EQ(ifl::parse_classifier_kind("nb"), ifl::ClassifierKind::naive_bayes);
  EXPECT_EQ(ifl::parse_classifier_kind("ensemble"), ifl::ClassifierKind::boosted);
  EXPECT_EQ(ifl::parse_classifier_kind("tree"), ifl::ClassifierKind::tree);
  EXPECT_THROW(ifl::parse_classifier_kind("svm"), ifl::InvalidParameter);
}

TEST(ModelJson, RoundTripPreservesPredictions) {
  const auto d = ifl::testing::make_blobs(80, 3, 3, 1.0, 7);
  ifl::ClassifierConfig cfg;
  cfg.boost.n_learners = 15;
  for (auto kind : {ifl::ClassifierKind::naive_bayes, ifl::ClassifierKind::knn, ifl::ClassifierKind::tree,
                    ifl::ClassifierKind::boosted}) {
    cfg.kind = kind;
    cfg.knn.standardize = kind == ifl::ClassifierKind::knn;
    const auto model = ifl::fit(cfg, d.features, d.labels, 3);
    const std::string text = ifl::save_model_json(model);
    const auto back = ifl::load_model_json(text);
    EXPECT_EQ(back.index(), model.index());
    const auto a = ifl::predict(model, d.features), b = ifl::predict(back, d.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.probabilities, b.probabilities);
    EXPECT_EQ(ifl::save_model_json(back), text);
  }
  EXPECT_THROW(ifl::load_model_json("{\"schema\":\"other\"}"), ifl::Error);
}

}  // namespace
