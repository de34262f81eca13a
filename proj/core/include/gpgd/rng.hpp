#pragma once

#include <cstdint>
#include <random>

namespace gpgd {

/// The one generator used everywhere a stochastic choice is made. Every
/// stochastic operation takes an explicit seed and builds its own instance.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds from a parent
/// seed and a stream tag without consuming draws from a shared generator.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
  return mix_seed(parent ^ mix_seed(tag));
}

}  // namespace gpgd
