#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace biascal {

// mt19937_64's output sequence is fixed by the standard, so reports are
// byte-stable across standard libraries as long as we avoid the
// implementation-defined distributions. uniform_index() below replaces
// std::uniform_int_distribution for that reason.
using Rng = std::mt19937_64;

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for one purpose of a run ("context/sst2", "prior/sst2/dc-id",
// ...). Distinct tags give statistically independent streams, so adding a
// consumer never shifts another consumer's draws.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
  return splitmix64(splitmix64(seed) ^ fnv1a64(tag));
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag) {
  return Rng(derive_seed(seed, tag));
}

// Unbiased draw from [0, n). n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const auto bound = static_cast<std::uint64_t>(n);
  // Lemire's multiply-shift with rejection of the short tail.
  std::uint64_t x = rng();
  auto m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

}  // namespace biascal
