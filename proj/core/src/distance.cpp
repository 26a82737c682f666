#include "ifl/distance.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "ifl/error.hpp"

namespace ifl {

Metric Metric::minkowski(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidParameter("minkowski: p must be a finite value > 0");
  return {MetricKind::minkowski, p};
}

Metric Metric::parse(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "EU" || s == "EUCLIDEAN") return euclidean();
  if (s == "CB" || s == "CITYBLOCK") return cityblock();
  if (s == "COS" || s == "COSINE") return cosine();
  if (s == "JA" || s == "JACCARD") return jaccard();
  for (std::string_view prefix : {"MINK(", "MINKOWSKI("}) {
    if (s.rfind(prefix, 0) == 0 && s.back() == ')') {
      const std::string_view arg(s.data() + prefix.size(), s.size() - prefix.size() - 1);
      double p = 0.0;
      auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
      if (ec != std::errc() || ptr != arg.data() + arg.size())
        throw InvalidParameter("metric: bad minkowski exponent in '" + std::string(text) + "'");
      return minkowski(p);
    }
  }
  throw InvalidParameter("unknown metric '" + std::string(text) + "' (expected EU, CB, COS, JA or MINK(p))");
}

std::string Metric::to_string() const {
  switch (kind) {
    case MetricKind::euclidean: return "EU";
    case MetricKind::cityblock: return "CB";
    case MetricKind::cosine: return "COS";
    case MetricKind::jaccard: return "JA";
    case MetricKind::minkowski: {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), p);
      return "MINK(" + std::string(buf, ptr) + ")";
    }
  }
  return "?";
}

double distance(const Metric& metric, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw InvalidParameter("distance: length mismatch (" + std::to_string(x.size()) + " vs " +
                           std::to_string(y.size()) + ")");
  const std::size_t n = x.size();
  switch (metric.kind) {
    case MetricKind::euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case MetricKind::cityblock: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
      return s;
    }
    case MetricKind::minkowski: {
      const double p = metric.p;
      if (p == 1.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
        return s;
      }
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(x[i] - y[i]), p);
      return std::pow(s, 1.0 / p);
    }
    case MetricKind::cosine: {
      double dot = 0.0, nx = 0.0, ny = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
      }
      if (nx == 0.0 || ny == 0.0) return 1.0;
      const double d = 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
      return std::clamp(d, 0.0, 2.0);
    }
    case MetricKind::jaccard: {
      std::size_t nonzero = 0, differ = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] != 0.0 || y[i] != 0.0) {
          ++nonzero;
          if (x[i] != y[i]) ++differ;
        }
      }
      return nonzero == 0 ? 0.0 : static_cast<double>(differ) / static_cast<double>(nonzero);
    }
  }
  return 0.0;
}

}  // namespace ifl
