#include "gpgd/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gpgd/io.hpp"

namespace gpgd {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("TrainConfig: tau must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (mode == TrainMode::PnP && !(xi > 0.0)) throw std::invalid_argument("TrainConfig: PnP mode needs xi > 0");
  if (!(xi >= 0.0)) throw std::invalid_argument("TrainConfig: xi must be >= 0");
  if (!(tau_final_fraction > 0.0 && tau_final_fraction <= 1.0))
    throw std::invalid_argument("TrainConfig: tau_final_fraction must lie in (0,1]");
  if (probe_points < 1) throw std::invalid_argument("TrainConfig: probe_points must be >= 1");
}

Matrix stack_columns(std::span<const Vector> items) {
  if (items.empty()) return Matrix();
  Matrix m(items.front().size(), static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    require_length("stack_columns", static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(items[i].size()));
    m.col(static_cast<Eigen::Index>(i)) = items[i];
  }
  return m;
}

Matrix uniform_batch(std::size_t n, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = uni(rng);
  return z;
}

namespace {

struct SorTerms {
  double sum = 0.0;
  std::size_t degenerate = 0;
  Matrix grad_output;  // d(sum psi)/d(P(z)), one column per sample
};

// psi = |<p, r>| / (|p| |r|) with r = z - p. Differentiating in p (z fixed):
//   d<p,r>/dp = r - p,  d log(|p||r|)/dp = p/|p|^2 - r/|r|^2.
SorTerms sor_terms(const Matrix& z, const Matrix& pz, double guard, bool want_grad) {
  SorTerms t;
  if (want_grad) t.grad_output = Matrix::Zero(pz.rows(), pz.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const Vector p = pz.col(j);
    const Vector r = z.col(j) - p;
    const double np = p.norm();
    const double nr = r.norm();
    if (np <= guard || nr <= guard) {
      ++t.degenerate;
      continue;
    }
    const double inner = p.dot(r);
    const double denom = np * nr;
    const double value = std::abs(inner) / denom;
    t.sum += value;
    if (want_grad) {
      const double sgn = inner > 0.0 ? 1.0 : (inner < 0.0 ? -1.0 : 0.0);
      t.grad_output.col(j) = sgn * (r - p) / denom - value * (p / (np * np) - r / (nr * nr));
    }
  }
  return t;
}

Matrix noisy_inputs(const Matrix& batch, double xi, std::uint64_t noise_seed) {
  Rng rng(noise_seed);
  std::normal_distribution<double> normal(0.0, xi);
  Matrix out = batch;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += normal(rng);
  return out;
}

}  // namespace

LossAndGrad loss_and_grad(const DenseNet& net, const Matrix& batch, const Matrix& z_batch, const TrainConfig& cfg,
                          std::uint64_t noise_seed) {
  const auto n = net.input_dim();
  LossAndGrad out{{}, NetGradient::zeros_like(net)};
  if (batch.cols() > 0) {
    require_length("loss_and_grad: batch", n, static_cast<std::size_t>(batch.rows()));
    const Matrix inputs = cfg.mode == TrainMode::PnP ? noisy_inputs(batch, cfg.xi, noise_seed) : batch;
    const ForwardCache cache = forward_cached(net, inputs);
    const Matrix diff = cache.output - batch;
    const double scale = 1.0 / static_cast<double>(batch.cols() * static_cast<Eigen::Index>(n));
    out.loss.data = diff.squaredNorm() * scale;
    backward(net, cache, 2.0 * scale * diff, out.grad);
  }
  if (z_batch.cols() > 0) {
    require_length("loss_and_grad: z batch", n, static_cast<std::size_t>(z_batch.rows()));
    const bool want_grad = cfg.lambda > 0.0;
    const ForwardCache cache = forward_cached(net, z_batch);
    SorTerms t = sor_terms(z_batch, cache.output, cfg.psi_guard, want_grad);
    const double inv_s = 1.0 / static_cast<double>(z_batch.cols());
    out.loss.sor = t.sum * inv_s;
    out.loss.degenerate = t.degenerate;
    if (want_grad) backward(net, cache, (cfg.lambda * inv_s) * t.grad_output, out.grad);
  }
  out.loss.total = out.loss.data + cfg.lambda * out.loss.sor;
  if (!std::isfinite(out.loss.data)) throw TrainingDivergence("loss_and_grad: non-finite data term");
  if (!std::isfinite(out.loss.sor)) throw TrainingDivergence("loss_and_grad: non-finite SOR term");
  return out;
}

double sor_value(const DenseNet& net, const Matrix& z_batch, std::size_t* degenerate, double guard) {
  if (z_batch.cols() == 0) return 0.0;
  const SorTerms t = sor_terms(z_batch, net.forward_batch(z_batch), guard, false);
  if (degenerate) *degenerate = t.degenerate;
  return t.sum / static_cast<double>(z_batch.cols());
}

AdamState AdamState::zeros_like(const DenseNet& net) {
  const auto p = static_cast<Eigen::Index>(net.parameter_count());
  return AdamState{Vector::Zero(p), Vector::Zero(p), 0};
}

void adam_step(DenseNet& net, const NetGradient& grad, AdamState& state, double tau, const AdamParams& params) {
  const Vector g = grad.flatten();
  require_length("adam_step", net.parameter_count(), static_cast<std::size_t>(g.size()));
  if (state.m.size() != g.size()) state = AdamState::zeros_like(net);
  state.step += 1;
  state.m = params.beta1 * state.m + (1.0 - params.beta1) * g;
  state.v = params.beta2 * state.v + (1.0 - params.beta2) * g.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(params.beta1, t);
  const double c2 = 1.0 - std::pow(params.beta2, t);
  const Vector m_hat = state.m / c1;
  const Vector v_hat = state.v / c2;
  Vector theta = net.parameters();
  theta.array() -= tau * m_hat.array() / (v_hat.array().sqrt() + params.epsilon);
  net.set_parameters(theta);
}

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch) {
  if (cfg.tau_final_fraction == 1.0 || cfg.epochs <= 1) return cfg.tau;
  const double progress = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  const double f = cfg.tau_final_fraction;
  return cfg.tau * (f + (1.0 - f) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

Matrix probe_set(std::size_t n, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0x70be));
  return uniform_batch(n, cfg.probe_points, rng);
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
}

Matrix gather(std::span<const Vector> dataset, std::span<const std::size_t> idx) {
  Matrix m(dataset.front().size(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = dataset[idx[j]];
  return m;
}

}  // namespace

TrainResult train(DenseNet net, std::span<const Vector> dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const std::size_t n = net.input_dim();
  for (const auto& x : dataset) require_length("train: dataset item", n, static_cast<std::size_t>(x.size()));

  TrainResult result{std::move(net), {}};
  if (cfg.epochs == 0) return result;

  Rng rng(cfg.seed);
  const Matrix probe = probe_set(n, cfg);
  AdamState state = AdamState::zeros_like(result.net);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    const double tau = learning_rate_at(cfg, epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      const Matrix x = gather(dataset, std::span(order).subspan(start, count));
      const Matrix z = uniform_batch(n, count, rng);
      const std::uint64_t noise_seed = cfg.mode == TrainMode::PnP ? rng() : 0;
      LossAndGrad lg;
      try {
        lg = loss_and_grad(result.net, x, z, cfg, noise_seed);
      } catch (const TrainingDivergence& e) {
        throw TrainingDivergence(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                                 std::to_string(result.history.steps));
      }
      adam_step(result.net, lg.grad, state, tau, cfg.adam);
      loss_sum += lg.loss.data;
      ++batches;
      ++result.history.steps;
    }
    result.history.epochs.push_back({epoch, loss_sum / static_cast<double>(batches), sor_value(result.net, probe)});
  }
  return result;
}

std::string history_csv(const TrainHistory& history) {
  std::string out = "epoch,data_loss,probe_mean_psi\n";
  for (const auto& e : history.epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.data_loss) + "," + format_double(e.probe_mean_psi) + "\n";
  return out;
}

NetGradient stochastic_gradient(const DenseNet& net, std::span<const Vector> dataset, const TrainConfig& cfg,
                                Rng& rng) {
  const std::size_t s = std::min(cfg.batch_size, dataset.size());
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(s);
  std::sort(idx.begin(), idx.end());
  const Matrix x = gather(dataset, idx);
  const Matrix z = uniform_batch(net.input_dim(), s, rng);
  const std::uint64_t noise_seed = cfg.mode == TrainMode::PnP ? rng() : 0;
  return loss_and_grad(net, x, z, cfg, noise_seed).grad;
}

UnbiasednessReport stochastic_gradient_unbiasedness_check(const DenseNet& net, std::span<const Vector> dataset,
                                                          const TrainConfig& cfg, std::size_t trials,
                                                          std::size_t reference_points) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("unbiasedness check: empty dataset");
  if (trials < 1) throw std::invalid_argument("unbiasedness check: trials must be >= 1");
  const std::size_t n = net.input_dim();
  const auto dim = static_cast<Eigen::Index>(net.parameter_count());

  UnbiasednessReport rep;
  rep.trials = trials;

  // Reference. Data term: exact full-batch gradient for AE; Monte-Carlo over
  // random (item, noise) draws for PnP. SOR term: Monte-Carlo over uniform z.
  Rng ref_rng(derive_seed(cfg.seed, 0x4ef));
  Vector ref_mean = Vector::Zero(dim);
  Vector ref_m2 = Vector::Zero(dim);
  const bool mc_data = cfg.mode == TrainMode::PnP;
  const bool mc_sor = cfg.lambda > 0.0;
  TrainConfig data_only = cfg;
  data_only.lambda = 0.0;
  if (!mc_data) ref_mean = loss_and_grad(net, stack_columns(dataset), Matrix(), data_only, 0).grad.flatten();
  if (mc_data || mc_sor) {
    rep.reference_points = reference_points;
    Vector mean = Vector::Zero(dim);
    std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
    for (std::size_t j = 0; j < reference_points; ++j) {
      Matrix x;
      if (mc_data) x = dataset[pick(ref_rng)];
      const Matrix z = mc_sor ? uniform_batch(n, 1, ref_rng) : Matrix();
      const std::uint64_t noise_seed = mc_data ? ref_rng() : 0;
      const Vector g = loss_and_grad(net, x, z, cfg, noise_seed).grad.flatten();
      const Vector delta = g - mean;
      mean += delta / static_cast<double>(j + 1);
      ref_m2 += delta.cwiseProduct(g - mean);
    }
    ref_mean += mean;
  }
  rep.reference_gradient = ref_mean;

  Rng rng(derive_seed(cfg.seed, 0x7a1));
  Vector mean = Vector::Zero(dim);
  Vector m2 = Vector::Zero(dim);
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector g = stochastic_gradient(net, dataset, cfg, rng).flatten();
    const Vector delta = g - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta.cwiseProduct(g - mean);
  }
  rep.mean_gradient = mean;

  const double tt = static_cast<double>(trials);
  Vector var = trials > 1 ? Vector(m2 / (tt - 1.0)) : Vector(Vector::Zero(dim));
  Vector se2 = var / tt;
  if (rep.reference_points > 1) {
    const double nr = static_cast<double>(rep.reference_points);
    se2 += ref_m2 / (nr - 1.0) / nr;
  }
  rep.standard_error = se2.cwiseSqrt();
  rep.z_scores.resize(dim);
  std::size_t within = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double diff = rep.mean_gradient[i] - rep.reference_gradient[i];
    const double se = rep.standard_error[i];
    rep.z_scores[i] = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    if (std::abs(rep.z_scores[i]) <= 4.0) ++within;
  }
  rep.fraction_within_4se = static_cast<double>(within) / static_cast<double>(dim);
  return rep;
}

}  // namespace gpgd
