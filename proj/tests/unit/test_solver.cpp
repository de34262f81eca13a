#include <doctest.h>

#include "gpgd/constants.hpp"
#include "gpgd/metrics.hpp"
#include "gpgd/model_set.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"
#include "gpgd/solver.hpp"
#include "support/oracles.hpp"

using namespace gpgd;

TEST_CASE("fixed point") {
  const auto set = ModelSet::k_sparse(2, 12);
  Rng rng(1);
  const Vector x = set.sample(rng);
  const auto a = make_gaussian_operator(6, 12, 2);
  GpgdConfig cfg;
  cfg.gamma = default_step_size(a);
  cfg.max_iters = 20;
  cfg.x0 = x;
  const auto res = gpgd_run(a, a.apply(x), make_exact_projector(set), cfg, x);
  REQUIRE(res.trace.records.size() == 21);
  for (const auto& r : res.trace.records) CHECK(*r.abs_err <= 1e-14);
  CHECK(is_exact_psnr(*res.trace.records.back().psnr_db) == (res.x == x));
}

TEST_CASE("zero step applies P repeatedly") {
  const auto set = ModelSet::k_sparse(1, 4);
  const auto a = MeasurementOperator::identity(4);
  GpgdConfig cfg;
  cfg.gamma = 0.0;
  cfg.max_iters = 5;
  cfg.record_full_iterates = true;
  Vector y(4);
  y << 0.5, -3.0, 1.0, 2.0;
  const auto res = gpgd_run(a, y, make_exact_projector(set), cfg);
  const auto& xs = res.trace.iterates;
  REQUIRE(xs.size() == 6);
  CHECK(xs[0] == y);
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(xs[i] == hard_threshold(y, 1));
  CHECK(res.trace.iterations() == 5);
}

TEST_CASE("sparse recovery stays under the finite-sum bound") {
  const std::size_t n = 32, m = 16, k = 2;
  const auto set = ModelSet::k_sparse(k, n);
  for (std::uint64_t seed : {3, 4, 5}) {
    const auto a = make_gaussian_operator(m, n, seed);
    Rng rng(seed);
    const Vector x = set.sample(rng);
    GpgdConfig cfg;
    cfg.gamma = default_step_size(a);
    cfg.record_full_iterates = true;
    const auto res = gpgd_run(a, a.apply(x), make_exact_projector(set), cfg, x);
    const double delta = ric_exact_ksparse(a, cfg.gamma, k).value;
    const auto b = oracle::recovery_bound(delta, oracle::hard_threshold_beta(), cfg.gamma,
                                          (res.trace.iterates.front() - x).norm(), 0.0, cfg.max_iters);
    for (std::size_t i = 0; i < res.trace.iterates.size(); ++i)
      CHECK((res.trace.iterates[i] - x).norm() <= b[i] + 1e-9);
  }
}

TEST_CASE("well-conditioned sparse recovery converges") {
  // Tall A with the step 2 / (l_max + l_min) keeps delta * beta below 1.
  const auto set = ModelSet::k_sparse(1, 12);
  const auto a = make_gaussian_operator(400, 12, 9);
  const Matrix m = a.materialize();
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m.transpose() * m).eigenvalues();
  const double gamma = 2.0 / (ev.maxCoeff() + ev.minCoeff());
  REQUIRE(ric_exact_ksparse(a, gamma, 1).value * hard_threshold_beta() < 1.0);
  Rng rng(2);
  const Vector x = set.sample(rng);
  GpgdConfig cfg;
  cfg.gamma = gamma;
  const auto res = gpgd_run(a, a.apply(x), make_exact_projector(set), cfg, x);
  CHECK(*res.trace.records.back().rel_err < 1e-9);
}

TEST_CASE("stagnation stop") {
  const auto a = MeasurementOperator::identity(3);
  GpgdConfig cfg;
  cfg.gamma = 1.0;
  cfg.stagnation_tol = 1e-12;
  Vector y(3);
  y << 1, 2, 3;
  const auto res = gpgd_run(a, y, make_custom_projector("identity", [](const Vector& z) { return z; }), cfg);
  CHECK(res.trace.iterations() < cfg.max_iters);
}

TEST_CASE("divergence is reported") {
  const auto a = MeasurementOperator::dense(3.0 * Matrix::Identity(2, 2));
  GpgdConfig cfg;
  cfg.gamma = 1.0;
  cfg.max_iters = 2000;
  Vector y(2);
  y << 1, 1;
  CHECK_THROWS_AS(gpgd_run(a, y, make_custom_projector("identity", [](const Vector& z) { return z; }), cfg),
                  GpgdDivergence);
}

TEST_CASE("convergence iteration") {
  const std::vector<double> mono{1.0, 0.5, 0.009, 0.001};
  CHECK(*first_below(mono, 0.01) == 2);
  CHECK(*first_below(std::vector<double>{0.0, 1.0}, 0.01) == 0);
  CHECK_FALSE(first_below(std::vector<double>{1.0, 0.5, 0.2}, 0.01).has_value());

  GpgdTrace t;
  const Vector star = Vector::Ones(3);
  t.iterates = {star, 2 * star};
  t.records.resize(2);
  CHECK(*convergence_iteration(t, star, 0.01) == 0);
  CHECK_FALSE(convergence_iteration(t, -star, 0.01).has_value());
}

TEST_CASE("best index") {
  CHECK(best_index(std::vector<double>{12.0}) == 0);
  CHECK(best_index(std::vector<double>{10.0, 30.0, 20.0}) == 1);
  CHECK(best_index(std::vector<double>{5.0, 5.0, 5.0}) == 0);
  CHECK(best_index(std::vector<double>{1.0, kExactPsnr, kExactPsnr}) == 1);
}

TEST_CASE("trace csv") {
  const auto a = MeasurementOperator::identity(2);
  GpgdConfig cfg;
  cfg.max_iters = 2;
  Vector y(2);
  y << 0.5, 0.25;
  const auto res = gpgd_run(a, y, make_exact_projector(ModelSet::k_sparse(1, 2)), cfg, y);
  const auto csv = trace_csv(res.trace);
  CHECK(csv.rfind("iter,rel_err,psnr_db,residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const auto no_truth = trace_csv(gpgd_run(a, y, make_exact_projector(ModelSet::k_sparse(1, 2)), cfg).trace);
  CHECK(no_truth.find("\n0,,,") != std::string::npos);
}
