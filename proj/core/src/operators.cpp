#include "gpgd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gpgd/rng.hpp"

namespace gpgd {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x_{N-1} | x_{N-1} ...
std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  long r = i % period;
  if (r < 0) r += period;
  return static_cast<std::size_t>(r < n ? r : period - 1 - r);
}

std::pair<std::size_t, std::size_t> dims_of(const MeasurementOperator::Kind& kind) {
  return std::visit(
      overloaded{
          [](const ops::Dense& d) {
            return std::pair{static_cast<std::size_t>(d.matrix.rows()), static_cast<std::size_t>(d.matrix.cols())};
          },
          [](const ops::PixelMask& p) { return std::pair{p.kept.size(), p.n}; },
          [](const ops::Blur& b) { return std::pair{b.shape.size(), b.shape.size()}; },
          [](const ops::Subsample& s) {
            return std::pair{(s.shape.height / s.factor) * (s.shape.width / s.factor), s.shape.size()};
          },
          [](const ops::Composition& c) { return std::pair{c.parts.front().rows(), c.parts.back().cols()}; },
      },
      kind);
}

void validate(const MeasurementOperator::Kind& kind) {
  std::visit(overloaded{
                 [](const ops::Dense& d) {
                   if (d.matrix.size() == 0) throw std::invalid_argument("Dense operator: empty matrix");
                 },
                 [](const ops::PixelMask& p) {
                   if (!std::is_sorted(p.kept.begin(), p.kept.end()) ||
                       std::adjacent_find(p.kept.begin(), p.kept.end()) != p.kept.end())
                     throw std::invalid_argument("PixelMask: kept indices must be sorted and unique");
                   if (!p.kept.empty() && p.kept.back() >= p.n)
                     throw std::invalid_argument("PixelMask: kept index " + std::to_string(p.kept.back()) +
                                                 " out of range for n=" + std::to_string(p.n));
                 },
                 [](const ops::Blur& b) {
                   if (b.shape.size() == 0) throw std::invalid_argument("Blur: empty image shape");
                   if (b.kernel.rows() % 2 == 0 || b.kernel.cols() % 2 == 0)
                     throw std::invalid_argument("Blur: kernel dimensions must be odd");
                 },
                 [](const ops::Subsample& s) {
                   if (s.factor < 1) throw std::invalid_argument("Subsample: factor must be >= 1");
                   if (s.shape.height % s.factor != 0 || s.shape.width % s.factor != 0)
                     throw std::invalid_argument("Subsample: shape " + std::to_string(s.shape.height) + "x" +
                                                 std::to_string(s.shape.width) + " not divisible by factor " +
                                                 std::to_string(s.factor));
                 },
                 [](const ops::Composition& c) {
                   if (c.parts.empty()) throw std::invalid_argument("Composition: no parts");
                   for (std::size_t i = 0; i + 1 < c.parts.size(); ++i)
                     if (c.parts[i].cols() != c.parts[i + 1].rows())
                       throw DimensionError("Composition: inner dimensions disagree", c.parts[i].cols(),
                                            c.parts[i + 1].rows());
                 },
             },
             kind);
}

Vector blur_forward(const ops::Blur& b, const Vector& x) {
  const long h = static_cast<long>(b.shape.height);
  const long w = static_cast<long>(b.shape.width);
  const long kh = b.kernel.rows();
  const long kw = b.kernel.cols();
  const long ch = kh / 2;
  const long cw = kw / 2;
  Vector out = Vector::Zero(x.size());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long a = 0; a < kh; ++a) {
        const std::size_t rr = reflect(r + ch - a, h);
        for (long bb = 0; bb < kw; ++bb) {
          const std::size_t cc = reflect(c + cw - bb, w);
          acc += b.kernel(a, bb) * x[static_cast<Eigen::Index>(rr * w + cc)];
        }
      }
      out[r * w + c] = acc;
    }
  }
  return out;
}

Vector blur_adjoint(const ops::Blur& b, const Vector& y) {
  const long h = static_cast<long>(b.shape.height);
  const long w = static_cast<long>(b.shape.width);
  const long kh = b.kernel.rows();
  const long kw = b.kernel.cols();
  const long ch = kh / 2;
  const long cw = kw / 2;
  Vector out = Vector::Zero(y.size());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      const double v = y[r * w + c];
      for (long a = 0; a < kh; ++a) {
        const std::size_t rr = reflect(r + ch - a, h);
        for (long bb = 0; bb < kw; ++bb) {
          const std::size_t cc = reflect(c + cw - bb, w);
          out[static_cast<Eigen::Index>(rr * w + cc)] += b.kernel(a, bb) * v;
        }
      }
    }
  }
  return out;
}

}  // namespace

MeasurementOperator::MeasurementOperator(Kind kind) : kind_(std::move(kind)) {
  validate(kind_);
  std::tie(rows_, cols_) = dims_of(kind_);
}

MeasurementOperator MeasurementOperator::dense(Matrix m) { return MeasurementOperator(ops::Dense{std::move(m)}); }

MeasurementOperator MeasurementOperator::identity(std::size_t n) {
  return dense(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

MeasurementOperator MeasurementOperator::pixel_mask(std::size_t n, std::vector<std::size_t> kept) {
  return MeasurementOperator(ops::PixelMask{n, std::move(kept)});
}

MeasurementOperator MeasurementOperator::blur(Shape shape, Matrix kernel) {
  return MeasurementOperator(ops::Blur{shape, std::move(kernel)});
}

MeasurementOperator MeasurementOperator::subsample(Shape shape, std::size_t factor) {
  return MeasurementOperator(ops::Subsample{shape, factor});
}

MeasurementOperator MeasurementOperator::compose(std::vector<MeasurementOperator> parts) {
  return MeasurementOperator(ops::Composition{std::move(parts)});
}

Vector MeasurementOperator::apply(const Vector& x) const {
  require_length("MeasurementOperator::apply", cols_, static_cast<std::size_t>(x.size()));
  return std::visit(overloaded{
                        [&](const ops::Dense& d) -> Vector { return d.matrix * x; },
                        [&](const ops::PixelMask& p) -> Vector {
                          Vector out(static_cast<Eigen::Index>(p.kept.size()));
                          for (std::size_t i = 0; i < p.kept.size(); ++i)
                            out[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(p.kept[i])];
                          return out;
                        },
                        [&](const ops::Blur& b) -> Vector { return blur_forward(b, x); },
                        [&](const ops::Subsample& s) -> Vector {
                          const std::size_t oh = s.shape.height / s.factor;
                          const std::size_t ow = s.shape.width / s.factor;
                          Vector out(static_cast<Eigen::Index>(oh * ow));
                          for (std::size_t r = 0; r < oh; ++r)
                            for (std::size_t c = 0; c < ow; ++c)
                              out[static_cast<Eigen::Index>(r * ow + c)] =
                                  x[static_cast<Eigen::Index>(r * s.factor * s.shape.width + c * s.factor)];
                          return out;
                        },
                        [&](const ops::Composition& c) -> Vector {
                          Vector v = x;
                          for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) v = it->apply(v);
                          return v;
                        },
                    },
                    kind_);
}

Vector MeasurementOperator::adjoint_apply(const Vector& y) const {
  require_length("MeasurementOperator::adjoint_apply", rows_, static_cast<std::size_t>(y.size()));
  return std::visit(overloaded{
                        [&](const ops::Dense& d) -> Vector { return d.matrix.transpose() * y; },
                        [&](const ops::PixelMask& p) -> Vector {
                          Vector out = Vector::Zero(static_cast<Eigen::Index>(p.n));
                          for (std::size_t i = 0; i < p.kept.size(); ++i)
                            out[static_cast<Eigen::Index>(p.kept[i])] = y[static_cast<Eigen::Index>(i)];
                          return out;
                        },
                        [&](const ops::Blur& b) -> Vector { return blur_adjoint(b, y); },
                        [&](const ops::Subsample& s) -> Vector {
                          const std::size_t oh = s.shape.height / s.factor;
                          const std::size_t ow = s.shape.width / s.factor;
                          Vector out = Vector::Zero(static_cast<Eigen::Index>(s.shape.size()));
                          for (std::size_t r = 0; r < oh; ++r)
                            for (std::size_t c = 0; c < ow; ++c)
                              out[static_cast<Eigen::Index>(r * s.factor * s.shape.width + c * s.factor)] =
                                  y[static_cast<Eigen::Index>(r * ow + c)];
                          return out;
                        },
                        [&](const ops::Composition& c) -> Vector {
                          Vector v = y;
                          for (const auto& part : c.parts) v = part.adjoint_apply(v);
                          return v;
                        },
                    },
                    kind_);
}

Matrix MeasurementOperator::materialize() const {
  const auto n = static_cast<Eigen::Index>(cols_);
  Matrix out(static_cast<Eigen::Index>(rows_), n);
  Vector e = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    out.col(j) = apply(e);
    e[j] = 0.0;
  }
  return out;
}

Signal apply(const MeasurementOperator& op, const Signal& x) { return Signal(op.apply(x.data())); }

Signal adjoint_apply(const MeasurementOperator& op, const Signal& y) {
  return Signal(op.adjoint_apply(y.data()));
}

Matrix gaussian_blur_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("gaussian_blur_kernel: size must be odd and >= 1, got " + std::to_string(size));
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur_kernel: sigma must be > 0");
  const int c = size / 2;
  Matrix k(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double di = i - c;
      const double dj = j - c;
      k(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  return k / k.sum();
}

MeasurementOperator make_inpainting_operator(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0))
    throw std::invalid_argument("make_inpainting_operator: ratio must lie in [0,1), got " + std::to_string(ratio));
  const auto keep = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - ratio)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return MeasurementOperator::pixel_mask(n, std::move(idx));
}

MeasurementOperator make_superres_operator(Shape shape, std::size_t factor, const Matrix& kernel) {
  if (factor < 1) throw std::invalid_argument("make_superres_operator: factor must be >= 1");
  if (shape.height % factor != 0 || shape.width % factor != 0)
    throw std::invalid_argument("make_superres_operator: shape " + std::to_string(shape.height) + "x" +
                                std::to_string(shape.width) + " not divisible by factor " + std::to_string(factor));
  std::vector<MeasurementOperator> parts;
  parts.push_back(MeasurementOperator::subsample(shape, factor));
  parts.push_back(MeasurementOperator::blur(shape, kernel));
  return MeasurementOperator::compose(std::move(parts));
}

MeasurementOperator make_deblur_operator(Shape shape, const Matrix& kernel) {
  return MeasurementOperator::blur(shape, kernel);
}

MeasurementOperator make_gaussian_operator(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  return MeasurementOperator::dense(std::move(a));
}

double spectral_norm(const MeasurementOperator& op, double rel_tol, int max_iters, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(op.cols()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = op.adjoint_apply(op.apply(v));
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= rel_tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

}  // namespace gpgd
