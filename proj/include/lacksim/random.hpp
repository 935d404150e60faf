#pragma once

#include <cstdint>
#include <random>

namespace lacksim {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-call and per-stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t stream = 0) noexcept {
  return mix_seed(mix_seed(master ^ mix_seed(index)) + stream);
}

// Uniform draw on (0, 1], built from the top 53 bits so the result does not
// depend on the standard library's distribution implementation.
inline double uniform_open_closed(Rng& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(rng() >> 11) + 1.0) * kScale;
}

}  // namespace lacksim
