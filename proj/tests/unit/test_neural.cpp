#include <doctest.h>

#include "gpgd/checkpoint.hpp"
#include "gpgd/constants.hpp"
#include "gpgd/dataset.hpp"
#include "gpgd/dense_net.hpp"
#include "gpgd/training.hpp"
#include "support/oracles.hpp"

using namespace gpgd;

namespace {

DenseNet single_layer(const Matrix& w, ActivationKind act) {
  DenseLayer l{w, Vector::Zero(w.rows()), {act, 0.01}};
  return DenseNet({l});
}

DenseNet random_net(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  auto net = DenseNet::make(dims, seed);
  Vector p = net.parameters();
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : p) v = u(rng);
  net.set_parameters(p);
  return net;
}

}  // namespace

TEST_CASE("forward examples") {
  Vector x(2);
  x << -1.0, 2.0;
  CHECK(single_layer(Matrix::Identity(2, 2), ActivationKind::Identity).forward(x) == x);
  Vector leaky(2);
  leaky << -0.01, 2.0;
  CHECK(single_layer(Matrix::Identity(2, 2), ActivationKind::LeakyReLU).forward(x) == leaky);

  const std::vector<std::size_t> dims{5, 3, 5};
  const auto net = random_net(dims, 3);
  Vector in = Vector::LinSpaced(5, -1.0, 1.0);
  CHECK((net.forward(in) - oracle::net_forward(dims, net.parameters(), in, 0.01)).norm() < 1e-14);
  Matrix batch(5, 2);
  batch << in, -in;
  CHECK((net.forward_batch(batch).col(1) - net.forward(-in)).norm() < 1e-14);
}

TEST_CASE("construction") {
  const std::vector<std::size_t> dims{64, 32, 16, 32, 64};
  const auto net = DenseNet::make(dims, 1);
  CHECK(net.dims() == dims);
  CHECK(net.parameter_count() == 64 * 32 + 32 + 32 * 16 + 16 + 16 * 32 + 32 + 32 * 64 + 64);
  CHECK(*net.latent_index() == 2);
  CHECK(net.parameters() == DenseNet::make(dims, 1).parameters());
  CHECK(net.parameters() != DenseNet::make(dims, 2).parameters());
  for (const auto& l : net.layers()) CHECK(l.bias.isZero());
  CHECK_THROWS(net.forward(Vector::Zero(10)));
}

TEST_CASE("data term vanishes on fixed points") {
  const auto net = single_layer(Matrix::Identity(4, 4), ActivationKind::Identity);
  Matrix batch = Matrix::Random(4, 3);
  TrainConfig cfg;
  const auto lg = loss_and_grad(net, batch, Matrix(4, 0), cfg, 0);
  CHECK(lg.loss.data == 0.0);
  CHECK(lg.grad.flatten().isZero());
}

TEST_CASE("gradient matches central differences") {
  const std::vector<std::size_t> dims{6, 4, 6};
  for (auto mode : {TrainMode::AE, TrainMode::PnP}) {
    for (double lambda : {0.0, 0.4}) {
      auto net = random_net(dims, 7);
      Rng rng(8);
      const Matrix batch = uniform_batch(6, 5, rng);
      const Matrix z = uniform_batch(6, 4, rng);
      TrainConfig cfg;
      cfg.mode = mode;
      cfg.lambda = lambda;
      const Vector g = loss_and_grad(net, batch, z, cfg, 9).grad.flatten();
      const Vector fd = oracle::finite_difference(
          [&](const Vector& p) {
            auto copy = net;
            copy.set_parameters(p);
            return loss_and_grad(copy, batch, z, cfg, 9).loss.total;
          },
          net.parameters(), 1e-5);
      CHECK((g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()) < 1e-7);
    }
  }
}

TEST_CASE("sor value") {
  // Affine net whose weight is an orthogonal projection matrix.
  Matrix b = Matrix::Zero(4, 2);
  b(0, 0) = b(1, 1) = 1.0 / std::sqrt(2.0);
  b(2, 0) = 1.0 / std::sqrt(2.0);
  b(3, 1) = -1.0 / std::sqrt(2.0);
  const auto proj = single_layer(b * b.transpose(), ActivationKind::Identity);
  Rng rng(1);
  const Matrix z = uniform_batch(4, 128, rng);
  CHECK(sor_value(proj, z) < 1e-9);

  std::size_t degenerate = 0;
  const auto id = single_layer(Matrix::Identity(4, 4), ActivationKind::Identity);
  CHECK(sor_value(id, z, &degenerate) == 0.0);
  CHECK(degenerate == 128);

  const std::vector<std::size_t> dims{6, 4, 6};
  const auto net = random_net(dims, 4);
  const Matrix zz = uniform_batch(6, 256, rng);
  double expected = 0.0;
  for (Eigen::Index j = 0; j < zz.cols(); ++j) expected += *psi(zz.col(j), net.forward(zz.col(j)));
  CHECK(sor_value(net, zz) == doctest::Approx(expected / 256.0).epsilon(1e-13));
}

TEST_CASE("adam") {
  auto net = random_net({3, 2, 3}, 5);
  auto state = AdamState::zeros_like(net);
  const Vector before = net.parameters();
  adam_step(net, NetGradient::zeros_like(net), state, 1e-3);
  CHECK(net.parameters() == before);
  CHECK(state.step == 1);

  // First step from zero state: delta = -tau g / (|g| + eps) elementwise.
  auto fresh = random_net({3, 2, 3}, 5);
  auto s0 = AdamState::zeros_like(fresh);
  auto grad = NetGradient::zeros_like(fresh);
  for (auto& w : grad.weight) w.setConstant(0.3);
  for (auto& v : grad.bias) v.setConstant(-2e-4);
  const double tau = 1e-2;
  adam_step(fresh, grad, s0, tau);
  const Vector g = grad.flatten();
  const Vector expected = before.array() - tau * g.array() / (g.array().abs() + 1e-8);
  CHECK((fresh.parameters() - expected).cwiseAbs().maxCoeff() < 1e-15);

  // Constant gradient: step magnitude stays at tau.
  for (int i = 0; i < 200; ++i) {
    const Vector p = fresh.parameters();
    adam_step(fresh, grad, s0, tau);
    CHECK((fresh.parameters() - p).cwiseAbs().maxCoeff() == doctest::Approx(tau).epsilon(1e-6));
  }
}

TEST_CASE("training") {
  const auto ds = synth_dataset("bars", {4, 4}, 64, 3);
  const std::vector<std::size_t> dims{16, 8, 16};
  const auto net = DenseNet::make(dims, 4);
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK(train(net, ds.items, cfg).net.parameters() == net.parameters());

  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.tau = 5e-3;
  cfg.lambda = 0.2;
  cfg.seed = 11;
  const auto a = train(net, ds.items, cfg);
  const auto b = train(net, ds.items, cfg);
  CHECK(a.net.parameters() == b.net.parameters());
  REQUIRE(a.history.epochs.size() == 5);
  CHECK(a.history.steps == 20);
  CHECK(a.history.epochs.back().data_loss < a.history.epochs.front().data_loss);
  cfg.seed = 12;
  CHECK(train(net, ds.items, cfg).net.parameters() != a.net.parameters());
  CHECK(history_csv(a.history).rfind("epoch,data_loss,probe_mean_psi\n", 0) == 0);
}

TEST_CASE("learning rate schedule") {
  TrainConfig cfg;
  cfg.tau = 1e-2;
  cfg.epochs = 11;
  CHECK(learning_rate_at(cfg, 7) == cfg.tau);
  cfg.tau_final_fraction = 0.1;
  CHECK(learning_rate_at(cfg, 0) == doctest::Approx(1e-2));
  CHECK(learning_rate_at(cfg, 10) == doctest::Approx(1e-3));
  CHECK(learning_rate_at(cfg, 5) == doctest::Approx(5.5e-3));
}

TEST_CASE("stochastic gradient unbiasedness") {
  const auto ds = synth_dataset("bars", {3, 3}, 12, 2);
  const auto net = random_net({9, 4, 9}, 3);
  TrainConfig cfg;
  cfg.batch_size = 12;
  const auto full = stochastic_gradient_unbiasedness_check(net, ds.items, cfg, 3, 10);
  CHECK((full.mean_gradient - full.reference_gradient).cwiseAbs().maxCoeff() < 1e-14);

  cfg.lambda = 0.4;
  cfg.batch_size = 4;
  const auto one = stochastic_gradient_unbiasedness_check(net, ds.items, cfg, 1, 100);
  CHECK(one.trials == 1);
  const auto rep = stochastic_gradient_unbiasedness_check(net, ds.items, cfg, 4000, 20000);
  CHECK(rep.fraction_within_4se >= 0.99);
}

TEST_CASE("checkpoint round trip and errors") {
  const auto net = random_net({5, 3, 5}, 6);
  const auto bytes = encode_checkpoint(net);
  const auto back = decode_checkpoint(bytes);
  CHECK(back.parameters() == net.parameters());
  CHECK(back.same_architecture(net));

  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint("not json\n"), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint(""), CheckpointError);

  const auto dir = std::filesystem::temp_directory_path() / "gpgd-unit-ckpt";
  save_checkpoint(net, dir / "a.ckpt");
  CHECK(load_checkpoint(dir / "a.ckpt", net).parameters() == net.parameters());
  CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt", DenseNet::make(std::vector<std::size_t>{5, 4, 5}, 1)),
                  ShapeMismatchError);
  std::filesystem::remove_all(dir);
}
