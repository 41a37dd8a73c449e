#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace grv {

using Rng = std::mt19937_64;

// Derives an independent seed for a named sub-stream ("counting",
// "training", "relvec", "eval") and optional integer tags such as a word
// pair or a slot.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream,
                         std::initializer_list<std::uint64_t> tags = {});

// Uniform integer in [0, bound) by rejection sampling. Unlike
// std::uniform_int_distribution the draw sequence is fixed across standard
// libraries.
std::uint64_t UniformIndex(Rng& rng, std::uint64_t bound);

double UniformReal(Rng& rng, double lo, double hi);

// `count` distinct ids drawn uniformly from [0, n) minus the sorted
// `excluded` ids, in draw order. `count` must not exceed the ids available.
std::vector<std::uint32_t> SampleExcluding(
    std::span<const std::uint32_t> excluded, std::uint32_t n, std::size_t count,
    Rng& rng);

// In-place Fisher-Yates shuffle driven by UniformIndex.
template <typename T>
void FisherYatesShuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t m = items.size(); m > 1; --m) {
    const std::size_t pick = UniformIndex(rng, m);
    std::swap(items[m - 1], items[pick]);
  }
}

}  // namespace grv
