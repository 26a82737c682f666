#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>

#include "ifl/dataset.hpp"
#include "ifl/engine.hpp"

namespace ifl::cli {

/// Runs the `ifl` command line. Returns 0 on success, 1 on a validation
/// error or bad usage, 2 on any other failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct ScalingResult {
  std::size_t rows = 0;
  /// Mean seconds of train-phase feature learning on `rows` and `2 * rows` rows.
  double seconds_n = 0.0;
  double seconds_2n = 0.0;
  double ratio() const { return seconds_n > 0.0 ? seconds_2n / seconds_n : 0.0; }
};

/// Times learn_train_features on a shuffled n-row subset and a 2n-row
/// superset of it, averaging over `repeats` runs. `rows` = 0 uses half the data.
ScalingResult scaling_bench(const Dataset& data, const IflConfig& cfg, std::size_t rows, std::size_t repeats,
                            std::uint64_t seed);

}  // namespace ifl::cli
