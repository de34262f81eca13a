#include <doctest.h>

#include "gpgd/io.hpp"
#include "gpgd/metrics.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/solver.hpp"
#include "support/oracles.hpp"

using namespace gpgd;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("dense identity apply and adjoint") {
  const auto a = MeasurementOperator::dense(Matrix::Identity(3, 3));
  CHECK(a.apply(vec({1, 2, 3})) == vec({1, 2, 3}));
  CHECK(a.adjoint_apply(vec({1, 2, 3})) == vec({1, 2, 3}));
}

TEST_CASE("pixel mask selects and zero-fills") {
  const auto a = MeasurementOperator::pixel_mask(3, {0, 2});
  CHECK(a.apply(vec({5, 6, 7})) == vec({5, 7}));
  CHECK(a.adjoint_apply(vec({5, 7})) == vec({5, 0, 7}));
}

TEST_CASE("length mismatch names both lengths") {
  const auto a = MeasurementOperator::identity(4);
  CHECK_THROWS_AS(a.apply(vec({1, 2, 3})), DimensionError);
  try {
    a.apply(vec({1, 2, 3}));
  } catch (const DimensionError& e) {
    CHECK(e.expected() == 4);
    CHECK(e.actual() == 3);
  }
}

TEST_CASE("blur of a centered impulse reproduces the kernel") {
  const Matrix k = gaussian_blur_kernel(3, 0.8);
  Vector x = Vector::Zero(49);
  x[3 * 7 + 3] = 1.0;
  const Vector out = MeasurementOperator::blur({7, 7}, k).apply(x);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 7; ++c) {
      const bool inside = std::abs(r - 3) <= 1 && std::abs(c - 3) <= 1;
      CHECK(out[r * 7 + c] == doctest::Approx(inside ? k(r - 2, c - 2) : 0.0).epsilon(1e-15));
    }
}

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_blur_kernel(1, 0.5)(0, 0) == 1.0);
  const Matrix flat = gaussian_blur_kernel(3, 1e6);
  CHECK(max_abs(flat - Matrix::Constant(3, 3, 1.0 / 9.0)) < 1e-6);
  const Matrix k = gaussian_blur_kernel(5, 1.0);
  CHECK(std::abs(k.sum() - 1.0) < 1e-12);
  CHECK(k == k.colwise().reverse());
  CHECK(k == k.rowwise().reverse());
  CHECK(k(2, 2) == doctest::Approx(oracle::gaussian_kernel(5, 1.0)(2, 2)).epsilon(1e-14));
  CHECK_THROWS(gaussian_blur_kernel(4, 1.0));
  CHECK_THROWS(gaussian_blur_kernel(3, 0.0));
}

TEST_CASE("inpainting operator") {
  const auto keep_all = make_inpainting_operator(10, 0.0, 1);
  CHECK(std::get<ops::PixelMask>(keep_all.kind()).kept.size() == 10);
  const auto a = make_inpainting_operator(10, 0.4, 5);
  const auto& kept = std::get<ops::PixelMask>(a.kind()).kept;
  CHECK(kept.size() == 6);
  CHECK(std::is_sorted(kept.begin(), kept.end()));
  CHECK(std::get<ops::PixelMask>(make_inpainting_operator(10, 0.4, 5).kind()).kept == kept);
  CHECK_THROWS(make_inpainting_operator(10, 1.0, 5));
}

TEST_CASE("super-resolution") {
  Matrix one(1, 1);
  one << 1.0;
  const auto id = make_superres_operator({4, 4}, 1, one);
  const Vector x = Vector::LinSpaced(16, 0.0, 1.0);
  CHECK(id.apply(x) == x);

  const auto a = make_superres_operator({4, 4}, 2, gaussian_blur_kernel(3, 0.7));
  const Vector out = a.apply(Vector::Constant(16, 0.3));
  REQUIRE(out.size() == 4);
  for (double v : out) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));

  Matrix k(3, 3);
  k << 0.0, 0.1, 0.0, 0.2, 0.4, 0.1, 0.0, 0.1, 0.1;
  Vector impulse = Vector::Zero(64);
  impulse[2 * 8 + 5] = 1.0;
  const Matrix dense = oracle::subsample_matrix(8, 8, 2) * oracle::blur_matrix(8, 8, k);
  CHECK(max_abs(make_superres_operator({8, 8}, 2, k).apply(impulse) - dense * impulse) < 1e-15);
  CHECK_THROWS(make_superres_operator({6, 6}, 4, k));
}

TEST_CASE("adjoint identity <Ax, y> = <x, A^T y> on every kind") {
  Matrix k(3, 3);
  k << 0.3, 0.1, 0.0, 0.1, 0.2, 0.05, 0.0, 0.05, 0.2;
  std::vector<MeasurementOperator> all = {
      make_gaussian_operator(7, 12, 3),
      make_inpainting_operator(36, 0.5, 4),
      MeasurementOperator::blur({6, 6}, k),
      MeasurementOperator::subsample({6, 6}, 3),
      make_deblur_operator({6, 6}, gaussian_blur_kernel(5, 1.0)),
      MeasurementOperator::compose({make_inpainting_operator(36, 0.3, 9), MeasurementOperator::blur({6, 6}, k)}),
  };
  Rng rng(12);
  std::normal_distribution<double> normal;
  for (const auto& a : all) {
    Vector x(static_cast<Eigen::Index>(a.cols())), y(static_cast<Eigen::Index>(a.rows()));
    for (auto& v : x) v = normal(rng);
    for (auto& v : y) v = normal(rng);
    CHECK(a.apply(x).dot(y) == doctest::Approx(x.dot(a.adjoint_apply(y))).epsilon(1e-12));
    CHECK(max_abs(a.materialize().transpose() * y - a.adjoint_apply(y)) < 1e-12);
  }
}

TEST_CASE("noise") {
  const Vector y = Vector::LinSpaced(1000, 0.0, 1.0);
  CHECK(add_noise(y, {0.0, 1}) == y);
  CHECK(add_noise(y, {0.1, 2}) == add_noise(y, {0.1, 2}));
  CHECK(add_noise(y, {0.1, 2}) != add_noise(y, {0.1, 3}));
  const Vector e = add_noise(Vector::Zero(100000), {0.1, 4});
  const double sd = std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
  CHECK(sd == doctest::Approx(0.1).epsilon(0.01));
}

TEST_CASE("psnr") {
  const Vector ref = Vector::LinSpaced(50, 0.0, 0.8);
  CHECK(is_exact_psnr(psnr(ref, ref)));
  CHECK(psnr((ref.array() + 0.1).matrix(), ref) == doctest::Approx(20.0).epsilon(1e-12));
  Vector alt = ref;
  for (Eigen::Index i = 0; i < alt.size(); ++i) alt[i] += (i % 2 ? 0.1 : -0.1);
  CHECK(psnr(alt, ref) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr(alt, ref) == doctest::Approx(oracle::psnr(alt, ref)).epsilon(1e-14));
  CHECK_THROWS_AS(psnr(ref, Vector::Zero(3)), DimensionError);
}

TEST_CASE("default step size") {
  CHECK(default_step_size(MeasurementOperator::identity(5)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(default_step_size(MeasurementOperator::dense(2.0 * Matrix::Identity(4, 4))) ==
        doctest::Approx(0.25).epsilon(1e-8));
  const auto a = make_gaussian_operator(16, 32, 8);
  const double s = oracle::spectral_norm(a.materialize());
  CHECK(default_step_size(a) == doctest::Approx(1.0 / (s * s)).epsilon(1e-6));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.4) == "0.4");
}
