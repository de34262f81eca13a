#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls the library routine it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Every support of size k; keeps the largest energy, first (lexicographic)
/// support on ties.
inline Vec hard_threshold(const Vec& z, std::size_t k) {
  const auto n = static_cast<std::size_t>(z.size());
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  double best = -1.0;
  std::vector<bool> best_mask;
  do {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) e += z[static_cast<Eigen::Index>(i)] * z[static_cast<Eigen::Index>(i)];
    if (e > best) {
      best = e;
      best_mask = mask;
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  Vec out = Vec::Zero(z.size());
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask[i]) out[static_cast<Eigen::Index>(i)] = z[static_cast<Eigen::Index>(i)];
  return out;
}

/// Calls f on every sorted index subset of {0..n-1} with `size` elements.
inline void for_each_subset(std::size_t n, std::size_t size, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(size), true);
  std::vector<int> idx;
  do {
    idx.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) idx.push_back(static_cast<int>(i));
    f(idx);
  } while (std::prev_permutation(mask.begin(), mask.end()));
}

/// Largest singular value of the column blocks (I - gamma A^T A)(:, S) over
/// supports of size min(2k, n), by SVD.
inline double ric_ksparse(const Mat& a, double gamma, std::size_t k) {
  const auto n = static_cast<std::size_t>(a.cols());
  const Mat g = Mat::Identity(a.cols(), a.cols()) - gamma * a.transpose() * a;
  double best = 0.0;
  for_each_subset(n, std::min(2 * k, n), [&](const std::vector<int>& s) {
    Mat sub(g.rows(), static_cast<Eigen::Index>(s.size()));
    for (std::size_t j = 0; j < s.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = g.col(s[j]);
    best = std::max(best, Eigen::JacobiSVD<Mat>(sub).singularValues()[0]);
  });
  return best;
}

inline double spectral_norm(const Mat& a) { return Eigen::JacobiSVD<Mat>(a).singularValues()[0]; }

/// b_0 = e0, b_{i+1} = rate b_i + gamma |A^T e|.
inline std::vector<double> recovery_bound(double delta, double beta, double gamma, double e0, double atn,
                                          std::size_t iters) {
  std::vector<double> b{e0};
  for (std::size_t i = 0; i < iters; ++i) b.push_back(delta * beta * b.back() + gamma * atn);
  return b;
}

inline double hard_threshold_beta() { return std::sqrt((3.0 + std::sqrt(5.0)) / 2.0); }

inline std::size_t mirror(long i, long n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
  return static_cast<std::size_t>(i);
}

/// Dense matrix of a centered 2-D convolution (kernel flipped) with
/// half-sample mirror boundaries, row-major pixels.
inline Mat blur_matrix(std::size_t h, std::size_t w, const Mat& kernel) {
  const long ch = kernel.rows() / 2, cw = kernel.cols() / 2;
  Mat m = Mat::Zero(static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(h * w));
  for (long r = 0; r < static_cast<long>(h); ++r)
    for (long c = 0; c < static_cast<long>(w); ++c)
      for (long a = 0; a < kernel.rows(); ++a)
        for (long b = 0; b < kernel.cols(); ++b) {
          const auto rr = mirror(r - (a - ch), static_cast<long>(h));
          const auto cc = mirror(c - (b - cw), static_cast<long>(w));
          m(r * static_cast<long>(w) + c, static_cast<Eigen::Index>(rr * w + cc)) += kernel(a, b);
        }
  return m;
}

inline Mat subsample_matrix(std::size_t h, std::size_t w, std::size_t f) {
  const std::size_t oh = h / f, ow = w / f;
  Mat m = Mat::Zero(static_cast<Eigen::Index>(oh * ow), static_cast<Eigen::Index>(h * w));
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c)
      m(static_cast<Eigen::Index>(r * ow + c), static_cast<Eigen::Index>(r * f * w + c * f)) = 1.0;
  return m;
}

inline Mat mask_matrix(std::size_t n, const std::vector<std::size_t>& kept) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < kept.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(kept[i])) = 1.0;
  return m;
}

inline Mat gaussian_kernel(int size, double sigma) {
  Mat k(size, size);
  const int c = size / 2;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) k(i, j) = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
  return k / k.sum();
}

/// Orthogonal projection onto the union of lines spanned by unit columns.
inline Vec line_projection(const Mat& dirs, const Vec& z) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < dirs.cols(); ++j)
    if (std::abs(dirs.col(j).dot(z)) > std::abs(dirs.col(best).dot(z))) best = j;
  return dirs.col(best).dot(z) * dirs.col(best);
}

inline double cosine(const Vec& x, const Vec& y) { return x.dot(y) / (x.norm() * y.norm()); }

inline double psi(const Vec& z, const Vec& pz) {
  const Vec r = z - pz;
  return std::abs(pz.dot(r)) / (pz.norm() * r.norm());
}

/// sin of the angle between x and y computed from the component of y
/// orthogonal to x.
inline double sine(const Vec& x, const Vec& y) {
  const Vec xh = x / x.norm();
  const Vec yh = y / y.norm();
  return (yh - xh.dot(yh) * xh).norm();
}

/// (2 sin(P z, Pperp z) / sin^2(z, Pperp z))^{1/2}, the square roots of
/// 1 - cos^2 written as sines.
inline double phi(const Vec& z, const Vec& pz, const Vec& qz) {
  const double s_num = sine(qz, pz);
  const double s_den = sine(z, qz);
  return std::sqrt(2.0 * s_num / (s_den * s_den));
}

inline double psnr(const Vec& x, const Vec& ref) {
  const double mse = (x - ref).squaredNorm() / static_cast<double>(x.size());
  return -10.0 * std::log10(mse);
}

/// Central differences of f at p.
inline Vec finite_difference(const std::function<double(const Vec&)>& f, const Vec& p, double h) {
  Vec g(p.size());
  Vec q = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    q[i] = p[i] + h;
    const double up = f(q);
    q[i] = p[i] - h;
    const double down = f(q);
    q[i] = p[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Dense network forward pass from flat parameters (per layer: weight
/// row-major, then bias), leaky ReLU on hidden layers and identity on the last.
inline Vec net_forward(const std::vector<std::size_t>& dims, const Vec& params, const Vec& x, double slope) {
  Vec a = x;
  Eigen::Index off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]), out = static_cast<Eigen::Index>(dims[l + 1]);
    Vec next(out);
    for (Eigen::Index i = 0; i < out; ++i) {
      double s = params[off + in * out + i];
      for (Eigen::Index j = 0; j < in; ++j) s += params[off + i * in + j] * a[j];
      next[i] = (l + 2 < dims.size() && s < 0.0) ? slope * s : s;
    }
    off += in * out + out;
    a = next;
  }
  return a;
}

}  // namespace oracle
