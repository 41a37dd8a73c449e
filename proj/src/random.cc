#include "grv/random.h"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace grv {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream,
                         std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a offset basis
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  std::uint64_t state = SplitMix64(seed ^ SplitMix64(h));
  for (std::uint64_t tag : tags) state = SplitMix64(state ^ SplitMix64(tag));
  return state;
}

std::uint64_t UniformIndex(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

double UniformReal(Rng& rng, double lo, double hi) {
  // 53 random bits mapped to [0, 1).
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

std::vector<std::uint32_t> SampleExcluding(
    std::span<const std::uint32_t> excluded, std::uint32_t n, std::size_t count,
    Rng& rng) {
  const std::size_t available = n - excluded.size();
  if (count > available) {
    throw std::invalid_argument("SampleExcluding: not enough ids");
  }
  std::vector<std::uint32_t> out;
  out.reserve(count);
  if (count == 0) return out;
  if (2 * count >= available) {
    // Dense: partial Fisher-Yates over the complement.
    std::vector<std::uint32_t> pool;
    pool.reserve(available);
    std::size_t next = 0;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (next < excluded.size() && excluded[next] == j) {
        ++next;
      } else {
        pool.push_back(j);
      }
    }
    for (std::size_t m = 0; m < count; ++m) {
      const std::size_t pick = m + UniformIndex(rng, pool.size() - m);
      std::swap(pool[m], pool[pick]);
      out.push_back(pool[m]);
    }
    return out;
  }
  std::unordered_set<std::uint32_t> chosen;
  while (out.size() < count) {
    const auto j = static_cast<std::uint32_t>(UniformIndex(rng, n));
    if (std::binary_search(excluded.begin(), excluded.end(), j)) continue;
    if (chosen.insert(j).second) out.push_back(j);
  }
  return out;
}

}  // namespace grv
