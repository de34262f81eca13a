#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpgd/model_set.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"

namespace gpgd {

/// Norms at or below this make psi / phi undefined.
inline constexpr double kPsiGuard = 1e-9;

/// <x,y> / (|x| |y|), clamped to [-1,1]. Throws on a zero-norm argument.
double cosine_alpha(const Vector& x, const Vector& y);

/// |<P(z), z-P(z)>| / (|P(z)| |z-P(z)|); nullopt when either norm <= guard.
std::optional<double> psi(const Vector& z, const Vector& pz, double guard = kPsiGuard);
std::optional<double> psi(const Projector& p, const Vector& z, double guard = kPsiGuard);

/// sqrt( 2 sqrt(1 - alpha(P_perp z, P z)^2) / (1 - alpha(z, P_perp z)^2) );
/// nullopt when z lies in the set (or P(z) / P_perp(z) vanish).
std::optional<double> phi(const ModelSet& set, const Projector& p, const Vector& z);

/// |P_perp(z) - P(z)| / |P_perp(z) - z|; nullopt when z lies in the set.
std::optional<double> lprime_ratio(const ModelSet& set, const Projector& p, const Vector& z);

enum class RicMethod { ExactSparseBruteForce, SampledLowerBound };

struct RicEstimate {
  double value = 0.0;
  RicMethod method = RicMethod::SampledLowerBound;
  std::size_t samples = 0;  // supports enumerated, or secant pairs drawn
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxRicSupports = 1'000'000;

/// delta_{Sigma_k}(gamma A^T A): max over supports S with |S| = min(2k, n) of
/// the spectral norm of the column block (I - gamma A^T A)(:, S). Throws when
/// the number of supports exceeds kMaxRicSupports.
RicEstimate ric_exact_ksparse(const MeasurementOperator& a, double gamma, std::size_t k);

/// Max of |(I - gamma A^T A)(x1 - x2)| / |x1 - x2| over sampled secant pairs.
RicEstimate ric_sampled(const MeasurementOperator& a, double gamma, const ModelSet& set, std::size_t samples,
                        std::uint64_t seed);

/// Draws a probe point z; receives the model element x it will be compared to.
using ZSampler = std::function<Vector(Rng&, const Vector& x)>;

/// z = r g / |g| with g ~ N(0, I) and r ~ U(0, radius].
ZSampler radial_sampler(double radius);
/// z = x + r g / |g| with r ~ U(0, radius]: probes near the model element.
ZSampler local_sampler(double radius);

struct LipschitzEstimate {
  double value = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // z == x
  std::uint64_t seed = 0;
  Vector witness_z;
  Vector witness_x;
  std::vector<double> running_max;  // running maximum after each accepted sample
};

/// max |P(z) - x| / |z - x| over sampled x in Sigma and z from the sampler.
LipschitzEstimate restricted_lipschitz_sampled(const Projector& p, const ModelSet& set, std::size_t samples,
                                               std::uint64_t seed, const ZSampler& sampler);

struct OrthogonalityReport {
  double mean_psi = 0.0;
  double max_psi = 0.0;
  double max_phi = 0.0;
  double lprime_hat = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // degenerate: z within guard of Sigma, or P(z) == 0
  std::uint64_t seed = 0;
  Vector lprime_witness;
};

/// Samples z with the radial sampler (radius 2) and aggregates psi, phi and
/// the L' ratio.
OrthogonalityReport orthogonality_report(const ModelSet& set, const Projector& p, std::size_t samples,
                                         std::uint64_t seed);
OrthogonalityReport orthogonality_report(const ModelSet& set, const Projector& p, std::size_t samples,
                                         std::uint64_t seed, const ZSampler& sampler);

struct LinearRecoveryBound {
  /// False when delta * beta >= 1: no convergence guarantee and no limit. The
  /// finite-sum sequence is still reported.
  bool guaranteed = false;
  double rate = 0.0;             // delta * beta
  std::vector<double> sequence;  // b_0 .. b_iters
  std::optional<double> limit;   // gamma / (1 - delta beta) |A^T e|
};

/// b_n = (delta beta)^n e0 + gamma (sum_{i<n} (delta beta)^i) |A^T e|.
LinearRecoveryBound theorem1_bound(double delta, double beta, double gamma, double init_err, double atn_norm,
                                   std::size_t iters);

/// Psi / sqrt(1 - Psi^2 - Phi^2) + Phi; nullopt when Psi^2 + Phi^2 >= 1.
std::optional<double> theorem3_bound(double big_psi, double big_phi);

/// beta_perp + L.
double theorem2_combine(double beta_perp, double lipschitz_gap);

/// sqrt((3 + sqrt 5) / 2), the restricted Lipschitz constant of hard thresholding.
double hard_threshold_beta();

void to_json(nlohmann::json& j, const RicEstimate& r);
void to_json(nlohmann::json& j, const LipschitzEstimate& r);
void to_json(nlohmann::json& j, const OrthogonalityReport& r);

std::string ric_csv_header();
std::string to_csv_row(const RicEstimate& r);
std::string lipschitz_csv_header();
std::string to_csv_row(const LipschitzEstimate& r);
std::string orthogonality_csv_header();
std::string to_csv_row(const OrthogonalityReport& r);

}  // namespace gpgd
