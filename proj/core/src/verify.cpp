#include "gpgd/verify.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "gpgd/constants.hpp"
#include "gpgd/metrics.hpp"
#include "gpgd/model_set.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"
#include "gpgd/rng.hpp"
#include "gpgd/solver.hpp"

namespace gpgd {

namespace {

class Tracker {
 public:
  Tracker(std::string suite, std::string name, double slack) : slack_(slack) {
    check_.suite = std::move(suite);
    check_.name = std::move(name);
  }

  void observe(double lhs, double rhs, const std::function<std::string()>& witness) {
    ++check_.checked;
    const double margin = lhs - rhs;
    if (!(margin <= worst_) || check_.checked == 1) {
      worst_ = margin;
      check_.lhs = lhs;
      check_.rhs = rhs;
      check_.witness = witness();
    }
    if (!(lhs <= rhs + slack_)) check_.status = CheckStatus::Fail;
  }

  void exclude() { ++check_.excluded; }

  Check finish() {
    if (check_.checked == 0) check_.status = CheckStatus::Skip;
    return check_;
  }

 private:
  Check check_;
  double slack_;
  double worst_ = -std::numeric_limits<double>::infinity();
};

std::string fmt(double v) { return format_double(v); }

void recovery_suite(const VerifyConfig& cfg, bool noisy, std::vector<Check>& out) {
  const std::string suite = noisy ? "recovery-noisy" : "recovery-noiseless";
  Tracker step(suite, "chain x_{i+1} <= delta |P(x_i)-x| + gamma |A^T e|", cfg.slack);
  Tracker proj(suite, "chain |P(x_i)-x| <= beta |x_i-x|", cfg.slack);
  Tracker finite(suite, "finite-sum bound b_i (all seeds)", cfg.slack);
  Tracker linear(suite, "bound b_i where delta*beta < 1", cfg.slack);
  Tracker stable(suite, "final error <= rate^N e0 + gamma/(1-rate) |A^T e|", cfg.slack);

  const auto set = ModelSet::k_sparse(cfg.k, cfg.n);
  const auto p = make_exact_projector(set);
  const double beta = hard_threshold_beta();

  for (std::size_t s = 0; s < cfg.recovery_seeds; ++s) {
    const std::uint64_t seed = derive_seed(cfg.seed, s);
    const auto a = make_gaussian_operator(cfg.m, cfg.n, seed);
    const double gamma = default_step_size(a);
    const double delta = ric_exact_ksparse(a, gamma, cfg.k).value;

    Rng rng(derive_seed(seed, 0x78));
    const Vector x_hat = set.sample(rng);
    const Vector clean = a.apply(x_hat);
    const Vector y = noisy ? add_noise(clean, NoiseSpec{cfg.noise_sigma, derive_seed(seed, 0x65)}) : clean;
    const double atn = a.adjoint_apply(y - clean).norm();

    GpgdConfig g;
    g.gamma = gamma;
    g.max_iters = cfg.iters;
    g.record_full_iterates = true;
    const auto res = gpgd_run(a, y, p, g, x_hat);
    const auto& xs = res.trace.iterates;

    const double e0 = (xs.front() - x_hat).norm();
    const auto bound = theorem1_bound(delta, beta, gamma, e0, atn, xs.size() - 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double err = (xs[i] - x_hat).norm();
      const auto where = [&] { return "seed=" + std::to_string(s) + " iter=" + std::to_string(i) + " delta=" + fmt(delta); };
      finite.observe(err, bound.sequence[i], where);
      if (bound.guaranteed)
        linear.observe(err, bound.sequence[i], where);
      if (i + 1 < xs.size()) {
        const double perr = (p(xs[i]) - x_hat).norm();
        proj.observe(perr, beta * err, where);
        step.observe((xs[i + 1] - x_hat).norm(), delta * perr + gamma * atn, where);
      }
    }
    if (bound.guaranteed) {
      const double rate = bound.rate;
      const double rhs = std::pow(rate, static_cast<double>(xs.size() - 1)) * e0 + gamma / (1.0 - rate) * atn;
      stable.observe((xs.back() - x_hat).norm(), rhs, [&] { return "seed=" + std::to_string(s) + " delta=" + fmt(delta); });
    } else {
      linear.exclude();
      stable.exclude();
    }
  }
  out.push_back(step.finish());
  out.push_back(proj.finish());
  out.push_back(finite.finish());
  out.push_back(linear.finish());
  if (noisy) out.push_back(stable.finish());
}

void lipschitz_suite(const VerifyConfig& cfg, std::vector<Check>& out) {
  const std::vector<std::pair<std::string, ZSampler>> samplers = {{"radial", radial_sampler(2.0)},
                                                                  {"local", local_sampler(1.0)}};
  for (const auto k : cfg.lipschitz_ks) {
    const auto set = ModelSet::k_sparse(k, cfg.lipschitz_n);
    const auto p = make_exact_projector(set);
    for (std::size_t j = 0; j < samplers.size(); ++j) {
      const auto& [name, sampler] = samplers[j];
      Tracker t("lipschitz", "hard threshold k=" + std::to_string(k) + " " + name + " beta <= 1.618", cfg.slack);
      const auto est = restricted_lipschitz_sampled(p, set, cfg.lipschitz_samples, derive_seed(cfg.seed, 100 * k + j), sampler);
      t.observe(est.value, hard_threshold_beta(), [&] { return "samples=" + std::to_string(est.samples); });
      out.push_back(t.finish());
    }
  }
  const auto lines = ModelSet::random_lines(cfg.lines, cfg.lines_dim, derive_seed(cfg.seed, 0x11));
  const auto p = make_exact_projector(lines);
  for (std::size_t j = 0; j < samplers.size(); ++j) {
    const auto& [name, sampler] = samplers[j];
    Tracker t("lipschitz", "union of lines " + name + " beta <= 2", cfg.slack);
    const auto est = restricted_lipschitz_sampled(p, lines, cfg.lipschitz_samples, derive_seed(cfg.seed, 0x200 + j), sampler);
    t.observe(est.value, 2.0, [&] { return "samples=" + std::to_string(est.samples); });
    out.push_back(t.finish());
  }
}

void perturbed_suites(const VerifyConfig& cfg, std::vector<Check>& out) {
  const auto set = ModelSet::random_lines(cfg.lines, cfg.lines_dim, derive_seed(cfg.seed, 0x11));
  const auto exact = make_exact_projector(set);
  const auto radial = radial_sampler(2.0);
  const auto local = local_sampler(1.0);

  for (std::size_t ti = 0; ti < cfg.perturb_t.size(); ++ti) {
    const double t = cfg.perturb_t[ti];
    const std::string tag = "t=" + fmt(t);
    const auto p = make_perturbed_projector(set, t, cfg.perturb_u, derive_seed(cfg.seed, 0x300 + ti));

    // Per-sample triangle chain behind the beta_perp + L combination.
    Tracker tri("triangle-chain", tag + " |P z - x| <= |P z - Pperp z| + |Pperp z - x|", cfg.slack);
    Tracker perp("triangle-chain", tag + " |Pperp z - x| <= 2 |z - x|", cfg.slack);
    Tracker dist("triangle-chain", tag + " |z - Pperp z| <= |z - x|", cfg.slack);
    Tracker comb("triangle-chain", tag + " |P z - x| <= (2 + L) |z - x|", cfg.slack);
    struct Sample {
      Vector z, x;
    };
    std::vector<Sample> samples;
    double l_hat = 0.0;
    Rng rng(derive_seed(cfg.seed, 0x400 + ti));
    for (std::size_t i = 0; i < cfg.orth_samples; ++i) {
      Vector x = set.sample(rng);
      Vector z = (i % 2 == 0 ? radial : local)(rng, x);
      if ((z - x).norm() == 0.0) continue;
      if (const auto r = lprime_ratio(set, p, z)) l_hat = std::max(l_hat, *r);
      samples.push_back({std::move(z), std::move(x)});
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& [z, x] = samples[i];
      const Vector pz = p(z);
      const Vector qz = exact(z);
      const auto where = [&] { return tag + " sample=" + std::to_string(i); };
      tri.observe((pz - x).norm(), (pz - qz).norm() + (qz - x).norm(), where);
      perp.observe((qz - x).norm(), 2.0 * (z - x).norm(), where);
      dist.observe((z - qz).norm(), (z - x).norm(), where);
      comb.observe((pz - x).norm(), theorem2_combine(2.0, l_hat) * (z - x).norm(), where);
    }
    out.push_back(tri.finish());
    out.push_back(perp.finish());
    out.push_back(dist.finish());
    out.push_back(comb.finish());

    Tracker orth("orthogonality", tag + " L' <= inflated Psi/sqrt(1-Psi^2-Phi^2) + Phi", cfg.slack);
    const auto rep = orthogonality_report(set, p, cfg.orth_samples, derive_seed(cfg.seed, 0x500 + ti));
    const auto bound = theorem3_bound(cfg.inflation * rep.max_psi, cfg.inflation * rep.max_phi);
    if (bound) {
      orth.observe(rep.lprime_hat, *bound, [&] {
        return tag + " psi=" + fmt(rep.max_psi) + " phi=" + fmt(rep.max_phi) + " samples=" + std::to_string(rep.samples);
      });
    } else {
      orth.exclude();
    }
    out.push_back(orth.finish());
  }
}

}  // namespace

std::size_t VerifyReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.status == CheckStatus::Fail;
  return n;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skip: return "skip";
  }
  return "?";
}

VerifyReport verify_theorems(const VerifyConfig& cfg) {
  VerifyReport r;
  recovery_suite(cfg, false, r.checks);
  recovery_suite(cfg, true, r.checks);
  lipschitz_suite(cfg, r.checks);
  perturbed_suites(cfg, r.checks);
  return r;
}

CsvTable verify_table(const VerifyReport& report) {
  CsvTable t;
  t.header = {"suite", "check", "status", "checked", "excluded", "lhs", "rhs", "witness"};
  for (const auto& c : report.checks)
    t.rows.push_back({c.suite, c.name, to_string(c.status), std::to_string(c.checked), std::to_string(c.excluded),
                      fmt(c.lhs), fmt(c.rhs), c.witness});
  return t;
}

std::string verify_text(const VerifyReport& report) {
  std::ostringstream o;
  for (const auto& c : report.checks) {
    o << '[' << to_string(c.status) << "] " << c.suite << ": " << c.name;
    if (c.checked) o << "  worst " << fmt(c.lhs) << " vs " << fmt(c.rhs) << " (" << c.witness << ')';
    o << "  checked=" << c.checked;
    if (c.excluded) o << " excluded=" << c.excluded;
    o << '\n';
  }
  o << report.failures() << " failing check(s) of " << report.checks.size() << '\n';
  return o.str();
}

}  // namespace gpgd
