#include <benchmark/benchmark.h>

#include "gpgd/constants.hpp"
#include "gpgd/dataset.hpp"
#include "gpgd/dense_net.hpp"
#include "gpgd/model_set.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"
#include "gpgd/solver.hpp"
#include "gpgd/training.hpp"

using namespace gpgd;

namespace {

Vector random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = normal(rng);
  return v;
}

// Image side length comes from the range argument.
MeasurementOperator image_operator(int kind, std::size_t side) {
  const Shape shape{side, side};
  switch (kind) {
    case 0: return make_inpainting_operator(shape.size(), 0.6, 1);
    case 1: return make_deblur_operator(shape, gaussian_blur_kernel(5, 1.0));
    default: return make_superres_operator(shape, 2, gaussian_blur_kernel(5, 1.0));
  }
}

void BM_OperatorApply(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto a = image_operator(static_cast<int>(state.range(0)), side);
  const Vector x = random_vector(side * side, 2);
  for (auto _ : state) benchmark::DoNotOptimize(a.apply(x));
}
BENCHMARK(BM_OperatorApply)->ArgsProduct({{0, 1, 2}, {8, 28, 64}})->ArgNames({"kind", "side"});

void BM_OperatorAdjoint(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto a = image_operator(static_cast<int>(state.range(0)), side);
  const Vector y = random_vector(a.rows(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(a.adjoint_apply(y));
}
BENCHMARK(BM_OperatorAdjoint)->ArgsProduct({{0, 1, 2}, {8, 28, 64}})->ArgNames({"kind", "side"});

void BM_HardThreshold(benchmark::State& state) {
  const Vector z = random_vector(static_cast<std::size_t>(state.range(0)), 4);
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(hard_threshold(z, k));
}
BENCHMARK(BM_HardThreshold)->Args({32, 2})->Args({784, 50})->Args({4096, 200});

void BM_ForwardBatch(benchmark::State& state) {
  const std::vector<std::size_t> dims = state.range(0) == 0 ? std::vector<std::size_t>{64, 32, 16, 32, 64}
                                                            : std::vector<std::size_t>{784, 256, 64, 256, 784};
  const auto net = DenseNet::make(dims, 5);
  Rng rng(6);
  const Matrix x = uniform_batch(dims.front(), 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(x));
}
BENCHMARK(BM_ForwardBatch)->Arg(0)->Arg(1);

void BM_LossAndGrad(benchmark::State& state) {
  const std::vector<std::size_t> dims = state.range(0) == 0 ? std::vector<std::size_t>{64, 32, 16, 32, 64}
                                                            : std::vector<std::size_t>{784, 256, 64, 256, 784};
  const auto net = DenseNet::make(dims, 7);
  Rng rng(8);
  const Matrix x = uniform_batch(dims.front(), 64, rng);
  const Matrix z = uniform_batch(dims.front(), 64, rng);
  TrainConfig cfg;
  cfg.lambda = 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(net, x, z, cfg, 9));
}
BENCHMARK(BM_LossAndGrad)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_GpgdSparse(benchmark::State& state) {
  const auto set = ModelSet::k_sparse(2, 32);
  const auto a = make_gaussian_operator(16, 32, 10);
  Rng rng(11);
  const Vector x = set.sample(rng);
  const Vector y = a.apply(x);
  const auto p = make_exact_projector(set);
  GpgdConfig cfg;
  cfg.gamma = default_step_size(a);
  for (auto _ : state) benchmark::DoNotOptimize(gpgd_run(a, y, p, cfg, x));
}
BENCHMARK(BM_GpgdSparse)->Unit(benchmark::kMicrosecond);

void BM_GpgdLearnedInpainting(benchmark::State& state) {
  const auto ds = synth_dataset("bars", {8, 8}, 1, 12);
  const auto a = make_inpainting_operator(64, 0.6, 13);
  const auto p = make_learned_projector(DenseNet::make(std::vector<std::size_t>{64, 32, 16, 32, 64}, 14));
  const Vector y = a.apply(ds.items.front());
  GpgdConfig cfg;
  cfg.gamma = 1.0;
  cfg.record_full_iterates = true;
  for (auto _ : state) benchmark::DoNotOptimize(gpgd_run(a, y, p, cfg, ds.items.front()));
}
BENCHMARK(BM_GpgdLearnedInpainting)->Unit(benchmark::kMicrosecond);

void BM_RicExact(benchmark::State& state) {
  const auto a = make_gaussian_operator(16, 32, 15);
  const double gamma = default_step_size(a);
  for (auto _ : state) benchmark::DoNotOptimize(ric_exact_ksparse(a, gamma, 2));
}
BENCHMARK(BM_RicExact)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
