#include "ifl/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "ifl/error.hpp"

namespace ifl {
namespace {

Matrix centroid_means(const Matrix& points, std::span<const std::size_t> assignments, std::size_t k) {
  Matrix sums(k, points.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto row = points.row(i);
    auto dst = sums.row(assignments[i]);
    for (std::size_t c = 0; c < row.size(); ++c) dst[c] += row[c];
    ++counts[assignments[i]];
  }
  for (std::size_t t = 0; t < k; ++t) {
    const double n = static_cast<double>(counts[t]);
    for (double& v : sums.row(t)) v /= n;
  }
  return sums;
}

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, const Metric& metric, std::mt19937_64& rng) {
  const std::size_t s = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> weight(s, std::numeric_limits<double>::infinity());

  std::size_t first = std::uniform_int_distribution<std::size_t>(0, s - 1)(rng);
  std::vector<bool> chosen(s, false);
  chosen[first] = true;
  std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());

  for (std::size_t t = 1; t < k; ++t) {
    auto last = centroids.row(t - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      const double d = distance(metric, points.row(i), last);
      weight[i] = std::min(weight[i], d * d);
      total += weight[i];
    }
    std::size_t pick = s;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < s; ++i) {
        if (weight[i] <= 0.0) continue;
        pick = i;
        target -= weight[i];
        if (target < 0.0) break;
      }
    } else {
      // All remaining points coincide with a chosen centroid: pick an unchosen index uniformly.
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < s; ++i)
        if (!chosen[i]) open.push_back(i);
      pick = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
    }
    chosen[pick] = true;
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(t).begin());
  }
  return centroids;
}

void repair_empty(const Matrix& points, std::vector<std::size_t>& assignments, const Matrix& centroids,
                  const Metric& metric) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t a : assignments) ++counts[a];
  for (std::size_t t = 0; t < k; ++t) {
    if (counts[t] > 0) continue;
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      const std::size_t a = assignments[i];
      if (counts[a] < 2) continue;
      const double d = distance(metric, points.row(i), centroids.row(a));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --counts[assignments[far]];
    assignments[far] = t;
    counts[t] = 1;
  }
}

}  // namespace

std::size_t nearest_centroid(std::span<const double> x, const Matrix& centroids, const Metric& metric) {
  if (centroids.rows() == 0) throw InvalidParameter("nearest_centroid: empty centroid list");
  std::size_t best = 0;
  double best_d = distance(metric, x, centroids.row(0));
  for (std::size_t t = 1; t < centroids.rows(); ++t) {
    const double d = distance(metric, x, centroids.row(t));
    if (d < best_d) {
      best_d = d;
      best = t;
    }
  }
  return best;
}

double objective(const Matrix& points, std::span<const std::size_t> assignments, const Matrix& centroids) {
  if (assignments.size() != points.rows())
    throw InvalidParameter("objective: assignment count does not match point count");
  if (points.rows() > 0 && centroids.cols() != points.cols())
    throw InvalidParameter("objective: centroid width does not match point width");
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (assignments[i] >= centroids.rows()) throw InvalidParameter("objective: assignment out of range");
    auto x = points.row(i);
    auto c = centroids.row(assignments[i]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - c[j];
      total += d * d;
    }
  }
  return total;
}

Clustering kmeans(const Matrix& points, std::size_t k, const Metric& metric, std::uint64_t seed,
                  const KMeansOptions& options) {
  const std::size_t s = points.rows();
  if (s == 0) throw InvalidParameter("kmeans: no points");
  if (k == 0) throw InvalidParameter("kmeans: k must be >= 1");
  if (options.max_iter == 0) throw InvalidParameter("kmeans: max_iter must be >= 1");
  k = std::min(k, s);

  std::mt19937_64 rng(seed);
  Clustering result;
  result.centroids = plus_plus_seeds(points, k, metric, rng);
  result.assignments.assign(s, k);  // sentinel: no point assigned yet

  std::vector<std::size_t> next(s);
  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    for (std::size_t i = 0; i < s; ++i) next[i] = nearest_centroid(points.row(i), result.centroids, metric);
    repair_empty(points, next, result.centroids, metric);
    const bool changed = next != result.assignments;
    result.assignments = next;
    result.centroids = centroid_means(points, result.assignments, k);
    result.iterations = iter;
    result.objective_trace.push_back(objective(points, result.assignments, result.centroids));
    if (!changed) break;
  }
  result.objective = result.objective_trace.back();
  return result;
}

}  // namespace ifl
