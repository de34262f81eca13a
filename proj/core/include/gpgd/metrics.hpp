#pragma once

#include <cstdint>
#include <limits>

#include "gpgd/signal.hpp"

namespace gpgd {

/// Additive white Gaussian noise e ~ N(0, sigma^2 I). `sigma` is a standard
/// deviation.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

Vector add_noise(const Vector& y, const NoiseSpec& spec);
Signal add_noise(const Signal& y, const NoiseSpec& spec);

/// Returned by psnr() when the two signals agree exactly.
inline constexpr double kExactPsnr = std::numeric_limits<double>::infinity();

inline bool is_exact_psnr(double db) noexcept { return db == kExactPsnr; }

/// 10 log10(1 / MSE), peak 1.0.
double psnr(const Vector& x, const Vector& ref);
double psnr(const Signal& x, const Signal& ref);

}  // namespace gpgd
