#include <doctest.h>

#include "gpgd/constants.hpp"
#include "gpgd/model_set.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"
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

ModelSet axes() {
  return ModelSet::union_of_lines(Matrix::Identity(2, 2));
}

}  // namespace

TEST_CASE("cosine") {
  CHECK(cosine_alpha(vec({1, 2}), vec({1, 2})) == doctest::Approx(1.0));
  CHECK(cosine_alpha(vec({1, 0}), vec({0, 3})) == 0.0);
  CHECK(cosine_alpha(vec({1, 0}), vec({1, 1})) == doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK_THROWS(cosine_alpha(vec({0, 0}), vec({1, 1})));
}

TEST_CASE("psi") {
  const auto e1 = make_exact_projector(ModelSet::union_of_lines(vec({1, 0})));
  CHECK(*psi(e1, vec({1, 1})) == doctest::Approx(0.0));
  CHECK(*psi(vec({1, 1}), vec({1.5, 0})) == doctest::Approx(0.4472135955).epsilon(1e-9));
  CHECK(*psi(vec({1, 1}), vec({1.5, 0})) == doctest::Approx(oracle::psi(vec({1, 1}), vec({1.5, 0}))).epsilon(1e-14));
  CHECK_FALSE(psi(e1, vec({2, 0})).has_value());
}

TEST_CASE("phi") {
  const auto set = axes();
  CHECK(*phi(set, make_exact_projector(set), vec({2, 1})) == doctest::Approx(0.0));
  const auto pick_e2 = make_custom_projector("e2", [](const Vector& z) { return vec({0, z[1]}); });
  CHECK(*phi(set, pick_e2, vec({2, 1})) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
  CHECK(*phi(set, pick_e2, vec({2, 1})) ==
        doctest::Approx(oracle::phi(vec({2, 1}), vec({0, 1}), vec({2, 0}))).epsilon(1e-12));
  CHECK_FALSE(phi(set, pick_e2, vec({0, 3})).has_value());
}

TEST_CASE("exact RIC") {
  const auto id = MeasurementOperator::identity(6);
  CHECK(ric_exact_ksparse(id, 1.0, 2).value == doctest::Approx(0.0));
  CHECK(ric_exact_ksparse(id, 0.5, 2).value == doctest::Approx(0.5).epsilon(1e-12));
  const auto a = make_gaussian_operator(16, 32, 3);
  const double gamma = default_step_size(a);
  CHECK(ric_exact_ksparse(a, gamma, 2).value ==
        doctest::Approx(oracle::ric_ksparse(a.materialize(), gamma, 2)).epsilon(1e-10));
  CHECK_THROWS(ric_exact_ksparse(make_gaussian_operator(10, 60, 1), 0.1, 6));
}

TEST_CASE("sampled RIC is a lower bound") {
  CHECK(ric_sampled(MeasurementOperator::identity(8), 1.0, ModelSet::k_sparse(2, 8), 500, 1).value == 0.0);
  const auto a = make_gaussian_operator(16, 32, 3);
  const double gamma = default_step_size(a);
  const double exact = ric_exact_ksparse(a, gamma, 2).value;
  const auto sampled = ric_sampled(a, gamma, ModelSet::k_sparse(2, 32), 100000, 4);
  CHECK(sampled.value <= exact);
  CHECK(sampled.value >= 0.85 * exact);
  CHECK(sampled.method == RicMethod::SampledLowerBound);
}

TEST_CASE("restricted Lipschitz estimates") {
  const auto set = ModelSet::k_sparse(2, 8);
  const auto identity = make_custom_projector("identity", [](const Vector& z) { return z; });
  const auto on_set = [&set](Rng& rng, const Vector&) { return set.sample(rng); };
  const auto one = restricted_lipschitz_sampled(identity, set, 200, 1, on_set);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));

  const auto ht = ModelSet::k_sparse(1, 2);
  const auto est = restricted_lipschitz_sampled(make_exact_projector(ht), ht, 20000, 2, local_sampler(1.0));
  CHECK(est.value <= hard_threshold_beta());
  CHECK(est.value > 1.5);
  const double witness = (hard_threshold(est.witness_z, 1) - est.witness_x).norm() / (est.witness_z - est.witness_x).norm();
  CHECK(std::abs(witness - est.value) <= 1e-12);
  CHECK(std::is_sorted(est.running_max.begin(), est.running_max.end()));
}

TEST_CASE("orthogonality report") {
  const auto set = ModelSet::random_lines(5, 8, 3);
  const auto exact = orthogonality_report(set, make_exact_projector(set), 2000, 4);
  CHECK(exact.mean_psi < 1e-9);
  CHECK(exact.max_phi < 1e-9);
  CHECK(exact.lprime_hat < 1e-9);

  const auto rep = orthogonality_report(set, make_perturbed_projector(set, 0.1, 0.0, 5), 2000, 4);
  CHECK(rep.max_phi < 1e-6);
  CHECK(rep.lprime_hat > 0.0);
  CHECK(rep.mean_psi <= rep.max_psi);
  CHECK(rep.max_psi <= 1.0);
}

TEST_CASE("recovery bound sequence") {
  const auto geo = theorem1_bound(0.5, 1.0, 1.0, 1.0, 0.0, 4);
  CHECK(geo.guaranteed);
  REQUIRE(geo.sequence.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(geo.sequence[i] == doctest::Approx(std::pow(0.5, i)));

  const auto flat = theorem1_bound(0.0, 1.618, 0.3, 2.0, 0.5, 3);
  CHECK(flat.sequence[0] == 2.0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(flat.sequence[i] == doctest::Approx(0.15));
  CHECK(*flat.limit == doctest::Approx(0.15));

  const auto none = theorem1_bound(0.9, 1.618, 0.3, 1.0, 0.1, 10);
  CHECK_FALSE(none.guaranteed);
  CHECK_FALSE(none.limit.has_value());
  const auto ref = oracle::recovery_bound(0.9, 1.618, 0.3, 1.0, 0.1, 10);
  for (std::size_t i = 0; i <= 10; ++i) CHECK(none.sequence[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("orthogonality bound and combination") {
  CHECK(*theorem3_bound(0.0, 0.0) == 0.0);
  CHECK(*theorem3_bound(0.2, 0.0) == doctest::Approx(0.2041241452).epsilon(1e-9));
  CHECK_FALSE(theorem3_bound(0.6, 0.8).has_value());
  CHECK(theorem2_combine(2.0, 0.0) == 2.0);
  CHECK(theorem2_combine(1.618, 0.1) == doctest::Approx(1.718));
  CHECK(theorem2_combine(0.0, 0.0) == 0.0);
  CHECK(hard_threshold_beta() == doctest::Approx(1.6180339887).epsilon(1e-10));
}
