#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "gpgd/signal.hpp"

namespace gpgd {

class MeasurementOperator;

namespace ops {

struct Dense {
  Matrix matrix;
};

/// Keeps the listed pixel indices (sorted, unique); adjoint zero-fills.
struct PixelMask {
  std::size_t n = 0;
  std::vector<std::size_t> kept;
};

/// Square-kernel 2-D convolution on an image, symmetric (half-sample mirror)
/// boundary extension. Maps shape -> shape.
struct Blur {
  Shape shape;
  Matrix kernel;
};

/// Keeps the top-left sample of each factor x factor block.
struct Subsample {
  Shape shape;
  std::size_t factor = 1;
};

/// parts[0] is applied last: A = parts[0] * parts[1] * ... * parts.back().
struct Composition {
  std::vector<MeasurementOperator> parts;
};

}  // namespace ops

/// A linear map R^n -> R^m with an exact adjoint.
class MeasurementOperator {
 public:
  using Kind = std::variant<ops::Dense, ops::PixelMask, ops::Blur, ops::Subsample, ops::Composition>;

  explicit MeasurementOperator(Kind kind);

  static MeasurementOperator dense(Matrix m);
  static MeasurementOperator identity(std::size_t n);
  static MeasurementOperator pixel_mask(std::size_t n, std::vector<std::size_t> kept);
  static MeasurementOperator blur(Shape shape, Matrix kernel);
  static MeasurementOperator subsample(Shape shape, std::size_t factor);
  static MeasurementOperator compose(std::vector<MeasurementOperator> parts);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const Kind& kind() const noexcept { return kind_; }

  Vector apply(const Vector& x) const;
  Vector adjoint_apply(const Vector& y) const;

  /// Explicit m x n matrix, built column by column from apply().
  Matrix materialize() const;

 private:
  Kind kind_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

Signal apply(const MeasurementOperator& op, const Signal& x);
Signal adjoint_apply(const MeasurementOperator& op, const Signal& y);

/// Normalized size x size Gaussian kernel, exp(-(i^2+j^2)/(2 sigma^2)) on
/// integer offsets from the center.
Matrix gaussian_blur_kernel(int size, double sigma);

/// Missing-pixel operator: deletes round(n * ratio) pixels, keeping
/// round(n * (1 - ratio)) chosen uniformly without replacement.
MeasurementOperator make_inpainting_operator(std::size_t n, double ratio, std::uint64_t seed);

/// Blur then subsample (A = S F).
MeasurementOperator make_superres_operator(Shape shape, std::size_t factor, const Matrix& kernel);

MeasurementOperator make_deblur_operator(Shape shape, const Matrix& kernel);

/// Dense m x n matrix with i.i.d. N(0, 1/m) entries.
MeasurementOperator make_gaussian_operator(std::size_t m, std::size_t n, std::uint64_t seed);

/// Largest singular value by power iteration on A^T A.
double spectral_norm(const MeasurementOperator& op, double rel_tol = 1e-10, int max_iters = 10000,
                     std::uint64_t seed = 0x5eed);

}  // namespace gpgd
