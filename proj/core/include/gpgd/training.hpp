#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpgd/constants.hpp"
#include "gpgd/dense_net.hpp"

namespace gpgd {

enum class TrainMode { AE, PnP };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double lambda = 0.0;      // SOR weight
  double tau = 1e-3;        // learning rate
  /// Cosine-anneal the learning rate from tau to tau * tau_final_fraction over
  /// the epochs. 1.0 keeps it constant.
  double tau_final_fraction = 1.0;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  TrainMode mode = TrainMode::AE;
  double xi = 0.1;          // PnP training noise std
  AdamParams adam;
  std::uint64_t seed = 0;
  double psi_guard = kPsiGuard;
  std::size_t probe_points = 512;

  void validate() const;
};

class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossBreakdown {
  double data = 0.0;  // mean over batch and pixels
  double sor = 0.0;   // (1/s) sum psi, degenerate samples count as 0
  double total = 0.0; // data + lambda * sor
  std::size_t degenerate = 0;
};

struct LossAndGrad {
  LossBreakdown loss;
  NetGradient grad;
};

/// Columns of `batch` and `z_batch` are samples. In PnP mode each training
/// sample is perturbed by N(0, xi^2 I) noise drawn from `noise_seed`.
LossAndGrad loss_and_grad(const DenseNet& net, const Matrix& batch, const Matrix& z_batch, const TrainConfig& cfg,
                          std::uint64_t noise_seed);

/// Empirical SOR term (1/s) sum psi(z_i); `degenerate` receives the number of
/// guarded samples.
double sor_value(const DenseNet& net, const Matrix& z_batch, std::size_t* degenerate = nullptr,
                 double guard = kPsiGuard);

/// Uniform [0,1]^n points, one per column.
Matrix uniform_batch(std::size_t n, std::size_t count, Rng& rng);

struct AdamState {
  Vector m;
  Vector v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const DenseNet& net);
};

/// Bias-corrected Adam: theta -= tau * m_hat / (sqrt(v_hat) + eps).
void adam_step(DenseNet& net, const NetGradient& grad, AdamState& state, double tau, const AdamParams& params = {});

struct EpochRecord {
  std::size_t epoch = 0;
  double data_loss = 0.0;       // mean of batch data losses
  double probe_mean_psi = 0.0;  // on the fixed uniform probe set
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t steps = 0;
};

/// Fixed uniform probe set used for per-epoch psi monitoring.
Matrix probe_set(std::size_t n, const TrainConfig& cfg);

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch);

struct TrainResult {
  DenseNet net;
  TrainHistory history;
};

/// Order of random draws per epoch: one shuffle of the dataset, then for each
/// batch a uniform z-batch of the same size followed (PnP only) by one 64-bit
/// noise seed. Deterministic per cfg.seed.
TrainResult train(DenseNet net, std::span<const Vector> dataset, const TrainConfig& cfg);

/// epoch,data_loss,probe_mean_psi
std::string history_csv(const TrainHistory& history);

struct UnbiasednessReport {
  std::size_t trials = 0;
  std::size_t reference_points = 0;
  Vector mean_gradient;
  Vector reference_gradient;
  Vector standard_error;  // combined SE of the difference
  Vector z_scores;
  double fraction_within_4se = 0.0;
};

/// Averages `trials` independent stochastic gradients (random batch of size
/// s without replacement, fresh z-batch) and compares each component against a
/// reference: full-batch data gradient plus a Monte-Carlo SOR gradient over
/// `reference_points` uniform points.
UnbiasednessReport stochastic_gradient_unbiasedness_check(const DenseNet& net, std::span<const Vector> dataset,
                                                          const TrainConfig& cfg, std::size_t trials,
                                                          std::size_t reference_points = 100'000);

/// One stochastic gradient G(theta) as used by a training step.
NetGradient stochastic_gradient(const DenseNet& net, std::span<const Vector> dataset, const TrainConfig& cfg, Rng& rng);

Matrix stack_columns(std::span<const Vector> items);

}  // namespace gpgd
