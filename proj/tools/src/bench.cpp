#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "ifl/error.hpp"
#include "ifl_cli/cli.hpp"

namespace ifl::cli {
namespace {

double time_once(const Dataset& data, const IflConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto aug = learn_train_features(data, cfg);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  if (aug.features.rows() != data.size()) throw Error("bench: unexpected output size");
  return elapsed.count();
}

}  // namespace

ScalingResult scaling_bench(const Dataset& data, const IflConfig& cfg, std::size_t rows, std::size_t repeats,
                            std::uint64_t seed) {
  if (rows == 0) rows = data.size() / 2;
  if (2 * rows > data.size())
    throw InvalidParameter("bench: need " + std::to_string(2 * rows) + " rows, dataset has " +
                           std::to_string(data.size()));
  if (repeats == 0) throw InvalidParameter("bench: repeats must be >= 1");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));
  std::vector<std::size_t> small(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(rows));
  std::vector<std::size_t> large(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(2 * rows));
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  const Dataset n_rows = data.subset(small);
  const Dataset two_n_rows = data.subset(large);

  ScalingResult result;
  result.rows = rows;
  for (std::size_t i = 0; i < repeats; ++i) {
    result.seconds_n += time_once(n_rows, cfg);
    result.seconds_2n += time_once(two_n_rows, cfg);
  }
  result.seconds_n /= static_cast<double>(repeats);
  result.seconds_2n /= static_cast<double>(repeats);
  return result;
}

}  // namespace ifl::cli
