/**
 * @file rng.hpp
 * @brief Seeded Gaussian noise streams for ensembles.
 */
#pragma once

#include <cstdint>
#include <random>

namespace padams {

/// SplitMix64 finalizer; a bijection on 64-bit words.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replicate `index` in an ensemble with base seed `base`. Depends
/// only on (base, index), never on scheduling.
[[nodiscard]] constexpr std::uint64_t replicate_seed(std::uint64_t base,
                                                     std::uint64_t index) noexcept {
  return splitmix64(base ^ splitmix64(index));
}

class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double standard_normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace padams
