#pragma once

#include <span>
#include <string>
#include <string_view>

namespace ifl {

enum class MetricKind { euclidean, cityblock, cosine, jaccard, minkowski };

/// A distance function selectable per layer. Config spellings: "EU", "CB",
/// "COS", "JA", "MINK(p)" (case-insensitive).
struct Metric {
  MetricKind kind = MetricKind::euclidean;
  /// Exponent, used only by minkowski; must be > 0.
  double p = 2.0;

  static Metric euclidean() { return {MetricKind::euclidean, 2.0}; }
  static Metric cityblock() { return {MetricKind::cityblock, 1.0}; }
  static Metric cosine() { return {MetricKind::cosine, 2.0}; }
  static Metric jaccard() { return {MetricKind::jaccard, 2.0}; }
  static Metric minkowski(double p);

  static Metric parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Metric&, const Metric&) = default;
};

/// Distance between two equal-length vectors.
///
/// cosine: 1 - x.y / (|x||y|), and 1 when either vector is all zeros.
/// jaccard: fraction of coordinates that differ among those where at least
/// one of x, y is nonzero; 0 when both are all zeros.
double distance(const Metric& metric, std::span<const double> x, std::span<const double> y);

inline double scalar_distance(double a, double b) noexcept { return a > b ? a - b : b - a; }

}  // namespace ifl
