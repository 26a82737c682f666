#include "ifl/metrics.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {

Score score(std::span<const int> predictions, std::span<const int> truth, std::size_t num_classes) {
  if (predictions.size() != truth.size())
    throw InvalidParameter("score: " + std::to_string(predictions.size()) + " predictions for " +
                           std::to_string(truth.size()) + " labels");
  if (truth.empty()) throw InvalidParameter("score: no labels");
  if (num_classes == 0) {
    int top = 0;
    for (int v : predictions) top = std::max(top, v);
    for (int v : truth) top = std::max(top, v);
    num_classes = static_cast<std::size_t>(top) + 1;
  }
  std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int p = predictions[i];
    const int t = truth[i];
    if (p < 0 || t < 0 || static_cast<std::size_t>(p) >= num_classes || static_cast<std::size_t>(t) >= num_classes)
      throw InvalidParameter("score: label out of range");
    if (p == t) {
      ++correct;
      tp[static_cast<std::size_t>(t)] += 1.0;
    } else {
      fp[static_cast<std::size_t>(p)] += 1.0;
      fn[static_cast<std::size_t>(t)] += 1.0;
    }
  }
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    f1_sum += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  return {static_cast<double>(correct) / static_cast<double>(truth.size()), f1_sum / static_cast<double>(num_classes)};
}

}  // namespace ifl
