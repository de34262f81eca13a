#include "gpgd/metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gpgd/rng.hpp"

namespace gpgd {

Vector add_noise(const Vector& y, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (spec.sigma == 0.0) return y;
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  Vector out = y;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += normal(rng);
  return out;
}

Signal add_noise(const Signal& y, const NoiseSpec& spec) { return Signal(add_noise(y.data(), spec), y.shape()); }

double psnr(const Vector& x, const Vector& ref) {
  require_length("psnr", static_cast<std::size_t>(ref.size()), static_cast<std::size_t>(x.size()));
  const double mse = (x - ref).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return kExactPsnr;
  return -10.0 * std::log10(mse);
}

double psnr(const Signal& x, const Signal& ref) { return psnr(x.data(), ref.data()); }

}  // namespace gpgd
