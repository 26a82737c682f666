#pragma once

#include <cstdint>
#include <limits>

namespace ifl {

inline constexpr std::uint64_t kNoIndex = std::numeric_limits<std::uint64_t>::max();

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one (fold, class, instance) cell. Any component may be kNoIndex.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t fold, std::uint64_t cls,
                                    std::uint64_t instance) noexcept {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ fold);
  h = splitmix64(h ^ cls);
  return splitmix64(h ^ instance);
}

}  // namespace ifl
