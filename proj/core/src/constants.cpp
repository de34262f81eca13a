#include "gpgd/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gpgd/io.hpp"

namespace gpgd {

double cosine_alpha(const Vector& x, const Vector& y) {
  require_length("cosine_alpha", static_cast<std::size_t>(x.size()), static_cast<std::size_t>(y.size()));
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("cosine_alpha: zero-norm argument");
  return std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
}

std::optional<double> psi(const Vector& z, const Vector& pz, double guard) {
  const Vector residual = z - pz;
  const double np = pz.norm();
  const double nr = residual.norm();
  if (np <= guard || nr <= guard) return std::nullopt;
  return std::min(1.0, std::abs(pz.dot(residual)) / (np * nr));
}

std::optional<double> psi(const Projector& p, const Vector& z, double guard) { return psi(z, p(z), guard); }

namespace {

// sqrt(1 - alpha(x,y)^2) via the residual of x against y. Angles below
// rounding resolution count as zero; phi takes a fourth root of this.
double sine_between(const Vector& x, const Vector& y) {
  const Vector xu = x / x.norm();
  const Vector yu = y / y.norm();
  const double s = (xu - xu.dot(yu) * yu).norm();
  return s <= 1e-14 ? 0.0 : std::min(1.0, s);
}

}  // namespace

std::optional<double> phi(const ModelSet& set, const Projector& p, const Vector& z) {
  const Vector perp = set.project(z);
  const Vector pz = p(z);
  if ((z - perp).norm() <= kPsiGuard * (1.0 + z.norm()) || perp.norm() <= kPsiGuard || pz.norm() <= kPsiGuard)
    return std::nullopt;
  const double sin_pp = sine_between(perp, pz);
  const double a_zp = cosine_alpha(z, perp);
  const double denom = 1.0 - a_zp * a_zp;
  if (denom <= 0.0) return std::nullopt;
  return std::sqrt(2.0 * sin_pp / denom);
}

std::optional<double> lprime_ratio(const ModelSet& set, const Projector& p, const Vector& z) {
  const Vector perp = set.project(z);
  const double dist = (perp - z).norm();
  if (dist <= kPsiGuard * (1.0 + z.norm())) return std::nullopt;
  return (perp - p(z)).norm() / dist;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

Vector secant_image(const MeasurementOperator& a, double gamma, const Vector& d) {
  return d - gamma * a.adjoint_apply(a.apply(d));
}

}  // namespace

RicEstimate ric_exact_ksparse(const MeasurementOperator& a, double gamma, std::size_t k) {
  const std::size_t n = a.cols();
  if (k < 1) throw std::invalid_argument("ric_exact_ksparse: k must be >= 1");
  const std::size_t s = std::min(2 * k, n);
  const double count = binomial(n, s);
  if (count > static_cast<double>(kMaxRicSupports))
    throw std::invalid_argument("ric_exact_ksparse: " + format_double(count) + " supports exceed the limit of " +
                                std::to_string(kMaxRicSupports));
  const Matrix am = a.materialize();
  const Matrix g = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
                   gamma * (am.transpose() * am);
  // |G v| for v supported on S is bounded by the column block G(:,S), whose
  // Gram matrix is the principal submatrix (G^2)(S,S).
  const Matrix g2 = g * g;

  // Principal submatrices of a PSD matrix have no larger top eigenvalue than
  // their parents, so supports of size exactly s suffice.
  std::vector<std::size_t> support(s);
  for (std::size_t i = 0; i < s; ++i) support[i] = i;
  const auto ss = static_cast<Eigen::Index>(s);
  Matrix sub(ss, ss);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(ss);
  double best = 0.0;
  std::size_t enumerated = 0;
  while (true) {
    for (Eigen::Index i = 0; i < ss; ++i)
      for (Eigen::Index j = 0; j < ss; ++j)
        sub(i, j) = g2(static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)]),
                      static_cast<Eigen::Index>(support[static_cast<std::size_t>(j)]));
    solver.compute(sub, Eigen::EigenvaluesOnly);
    best = std::max(best, std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff())));
    ++enumerated;
    // Next combination in lexicographic order.
    std::size_t i = s;
    while (i > 0 && support[i - 1] == n - s + (i - 1)) --i;
    if (i == 0) break;
    ++support[i - 1];
    for (std::size_t j = i; j < s; ++j) support[j] = support[j - 1] + 1;
  }
  return RicEstimate{best, RicMethod::ExactSparseBruteForce, enumerated, 0};
}

RicEstimate ric_sampled(const MeasurementOperator& a, double gamma, const ModelSet& set, std::size_t samples,
                        std::uint64_t seed) {
  require_length("ric_sampled", a.cols(), set.dimension());
  Rng rng(seed);
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector d = set.sample(rng) - set.sample(rng);
    const double nd = d.norm();
    if (nd == 0.0) continue;
    best = std::max(best, secant_image(a, gamma, d).norm() / nd);
  }
  return RicEstimate{best, RicMethod::SampledLowerBound, samples, seed};
}

ZSampler radial_sampler(double radius) {
  return [radius](Rng& rng, const Vector& x) -> Vector {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Vector g(x.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
    const double r = radius * (1.0 - uni(rng));  // (0, radius]
    return r * g / g.norm();
  };
}

ZSampler local_sampler(double radius) {
  auto radial = radial_sampler(radius);
  return [radial](Rng& rng, const Vector& x) -> Vector { return x + radial(rng, x); };
}

LipschitzEstimate restricted_lipschitz_sampled(const Projector& p, const ModelSet& set, std::size_t samples,
                                               std::uint64_t seed, const ZSampler& sampler) {
  Rng rng(seed);
  LipschitzEstimate est;
  est.seed = seed;
  est.running_max.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector x = set.sample(rng);
    const Vector z = sampler(rng, x);
    const double dz = (z - x).norm();
    if (dz == 0.0) {
      ++est.skipped;
      continue;
    }
    const double ratio = (p(z) - x).norm() / dz;
    if (ratio > est.value || est.witness_z.size() == 0) {
      est.value = std::max(est.value, ratio);
      est.witness_z = z;
      est.witness_x = x;
    }
    ++est.samples;
    est.running_max.push_back(est.value);
  }
  return est;
}

OrthogonalityReport orthogonality_report(const ModelSet& set, const Projector& p, std::size_t samples,
                                         std::uint64_t seed) {
  return orthogonality_report(set, p, samples, seed, radial_sampler(2.0));
}

OrthogonalityReport orthogonality_report(const ModelSet& set, const Projector& p, std::size_t samples,
                                         std::uint64_t seed, const ZSampler& sampler) {
  Rng rng(seed);
  OrthogonalityReport rep;
  rep.seed = seed;
  const Vector origin = Vector::Zero(static_cast<Eigen::Index>(set.dimension()));
  double psi_sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector z = sampler(rng, origin);
    const Vector perp = set.project(z);
    const double dist = (perp - z).norm();
    if (dist <= kPsiGuard * (1.0 + z.norm())) {
      ++rep.skipped;
      continue;
    }
    const Vector pz = p(z);
    const double lp = (perp - pz).norm() / dist;
    if (lp > rep.lprime_hat || rep.lprime_witness.size() == 0) {
      rep.lprime_hat = std::max(rep.lprime_hat, lp);
      rep.lprime_witness = z;
    }
    if (const auto v = psi(z, pz)) {
      psi_sum += *v;
      rep.max_psi = std::max(rep.max_psi, *v);
    }
    if (const auto v = phi(set, p, z)) rep.max_phi = std::max(rep.max_phi, *v);
    ++rep.samples;
  }
  rep.mean_psi = rep.samples ? psi_sum / static_cast<double>(rep.samples) : 0.0;
  return rep;
}

LinearRecoveryBound theorem1_bound(double delta, double beta, double gamma, double init_err, double atn_norm,
                                   std::size_t iters) {
  if (delta < 0.0 || beta < 0.0 || gamma < 0.0 || init_err < 0.0 || atn_norm < 0.0)
    throw std::invalid_argument("theorem1_bound: inputs must be non-negative");
  LinearRecoveryBound out;
  out.rate = delta * beta;
  out.guaranteed = out.rate < 1.0;
  out.sequence.reserve(iters + 1);
  double power = 1.0;    // rate^n
  double partial = 0.0;  // sum_{i<n} rate^i
  for (std::size_t n = 0; n <= iters; ++n) {
    out.sequence.push_back(power * init_err + gamma * partial * atn_norm);
    partial += power;
    power *= out.rate;
  }
  if (out.guaranteed) out.limit = gamma / (1.0 - out.rate) * atn_norm;
  return out;
}

std::optional<double> theorem3_bound(double big_psi, double big_phi) {
  const double slack = 1.0 - big_psi * big_psi - big_phi * big_phi;
  if (!(slack > 0.0)) return std::nullopt;
  return big_psi / std::sqrt(slack) + big_phi;
}

double theorem2_combine(double beta_perp, double lipschitz_gap) {
  if (beta_perp < 0.0 || lipschitz_gap < 0.0) throw std::invalid_argument("theorem2_combine: inputs must be >= 0");
  return beta_perp + lipschitz_gap;
}

double hard_threshold_beta() { return std::sqrt((3.0 + std::sqrt(5.0)) / 2.0); }

namespace {
const char* method_name(RicMethod m) {
  return m == RicMethod::ExactSparseBruteForce ? "exact_sparse_brute_force" : "sampled_lower_bound";
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
}  // namespace

void to_json(nlohmann::json& j, const RicEstimate& r) {
  j = {{"value", r.value}, {"method", method_name(r.method)}, {"samples", r.samples}, {"seed", r.seed}};
}

void to_json(nlohmann::json& j, const LipschitzEstimate& r) {
  j = {{"value", r.value},
       {"samples", r.samples},
       {"skipped", r.skipped},
       {"seed", r.seed},
       {"witness_z", to_std(r.witness_z)},
       {"witness_x", to_std(r.witness_x)}};
}

void to_json(nlohmann::json& j, const OrthogonalityReport& r) {
  j = {{"mean_psi", r.mean_psi}, {"max_psi", r.max_psi},   {"max_phi", r.max_phi},
       {"lprime_hat", r.lprime_hat}, {"samples", r.samples}, {"skipped", r.skipped},
       {"seed", r.seed},           {"lprime_witness", to_std(r.lprime_witness)}};
}

std::string ric_csv_header() { return "value,method,samples,seed"; }

std::string to_csv_row(const RicEstimate& r) {
  return format_double(r.value) + "," + method_name(r.method) + "," + std::to_string(r.samples) + "," +
         std::to_string(r.seed);
}

std::string lipschitz_csv_header() { return "value,samples,skipped,seed"; }

std::string to_csv_row(const LipschitzEstimate& r) {
  return format_double(r.value) + "," + std::to_string(r.samples) + "," + std::to_string(r.skipped) + "," +
         std::to_string(r.seed);
}

std::string orthogonality_csv_header() { return "mean_psi,max_psi,max_phi,lprime_hat,samples,skipped,seed"; }

std::string to_csv_row(const OrthogonalityReport& r) {
  return format_double(r.mean_psi) + "," + format_double(r.max_psi) + "," + format_double(r.max_phi) + "," +
         format_double(r.lprime_hat) + "," + std::to_string(r.samples) + "," + std::to_string(r.skipped) + "," +
         std::to_string(r.seed);
}

}  // namespace gpgd
