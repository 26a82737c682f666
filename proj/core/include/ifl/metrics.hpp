#pragma once

#include <cstddef>
#include <span>

namespace ifl {

struct Score {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

/// Accuracy and macro-F1 over `num_classes` classes. A class that is never
/// predicted and never true contributes an F1 of 0. When `num_classes` is 0
/// it is inferred as 1 + the largest label seen.
Score score(std::span<const int> predictions, std::span<const int> truth, std::size_t num_classes = 0);

}  // namespace ifl
