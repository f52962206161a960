#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace topiczero::detail {

// Uniform integer in [0, bound) by rejection. std::uniform_int_distribution
// is implementation-defined; this keeps fold plans identical across
// standard libraries.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace topiczero::detail
