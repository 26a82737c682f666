#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ifl/distance.hpp"
#include "ifl/matrix.hpp"

namespace ifl {

/// Result of a Lloyd's-algorithm run. Cluster indices are 0-based.
struct Clustering {
  std::vector<std::size_t> assignments;
  Matrix centroids;
  std::size_t iterations = 0;
  /// Sum of squared Euclidean distances of points to their centroids.
  double objective = 0.0;
  /// Objective after each iteration, for diagnostics.
  std::vector<double> objective_trace;

  std::size_t k() const noexcept { return centroids.rows(); }
};

struct KMeansOptions {
  std::size_t max_iter = 100;
};

/// K-means with k-means++ seeding.
///
/// `k` is clamped to the number of points. Assignment uses `metric`;
/// centroids are always coordinate-wise means of their members. A cluster
/// emptied during an iteration receives the point farthest from its own
/// centroid, so the result never has empty clusters. Deterministic for a
/// fixed seed.
Clustering kmeans(const Matrix& points, std::size_t k, const Metric& metric, std::uint64_t seed,
                  const KMeansOptions& options = {});

/// Index of the nearest centroid; ties go to the lowest index.
std::size_t nearest_centroid(std::span<const double> x, const Matrix& centroids, const Metric& metric);

/// Sum over points of the squared Euclidean distance to the assigned centroid.
double objective(const Matrix& points, std::span<const std::size_t> assignments, const Matrix& centroids);

}  // namespace ifl
