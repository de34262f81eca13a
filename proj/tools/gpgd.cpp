#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gpgd/checkpoint.hpp"
#include "gpgd/constants.hpp"
#include "gpgd/dataset.hpp"
#include "gpgd/experiment.hpp"
#include "gpgd/experiment_config.hpp"
#include "gpgd/io.hpp"
#include "gpgd/model_set.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"
#include "gpgd/training.hpp"
#include "gpgd/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kAssertionFailures = 1;
constexpr int kUsageError = 2;

// Flags shared by every subcommand.
struct Common {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::vector<double> lambdas;
  std::string out;
  std::string profile;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seeds, "seed(s); overrides `seeds`")->delimiter(',');
  cmd->add_option("--lambda", c.lambdas, "SOR weight(s); overrides `lambdas`")->delimiter(',');
  cmd->add_option("--out", c.out, "output directory (checkpoints/, traces/, reports/)");
  cmd->add_option("--profile", c.profile, "defaults profile")->check(CLI::IsMember({"desk", "mnist"}));
  cmd->add_option("--set", c.sets, "extra `key=value` override, repeatable");
}

gpgd::ExperimentConfig build_config(const Common& c) {
  std::vector<std::string> overrides;
  const auto join = [](const auto& xs, auto fmt) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ",") + fmt(x);
    return s;
  };
  if (!c.profile.empty()) overrides.push_back("profile = " + c.profile);
  if (!c.seeds.empty())
    overrides.push_back("seeds = " + join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }));
  if (!c.lambdas.empty()) overrides.push_back("lambdas = " + join(c.lambdas, gpgd::format_double));
  if (!c.out.empty()) overrides.push_back("out = " + c.out);
  overrides.insert(overrides.end(), c.sets.begin(), c.sets.end());
  if (c.config.empty()) return gpgd::parse_config("", overrides);
  return gpgd::load_config(c.config, overrides);
}

int cmd_gen_data(const Common& c, const std::string& format) {
  const auto cfg = build_config(c);
  if (cfg.dataset.source != gpgd::DatasetSource::Synthetic)
    throw gpgd::ConfigError("gen-data: dataset.source must be synthetic");
  const auto ds = gpgd::synth_dataset(cfg.dataset.name, cfg.dataset.shape, cfg.dataset.count + cfg.dataset.test_count,
                                      cfg.dataset.seed);
  const auto path = cfg.out / "data" / (cfg.dataset.name + (format == "idx" ? ".idx" : ".csv"));
  if (format == "idx")
    gpgd::write_file_bytes(path, gpgd::encode_idx(ds));
  else
    gpgd::write_dataset_csv(path, ds);
  std::cout << "wrote " << ds.size() << " items (" << ds.shape.height << "x" << ds.shape.width << ") to "
            << path.string() << '\n';
  return kOk;
}

int cmd_train(const Common& c, bool force) {
  const auto cfg = build_config(c);
  const auto data = gpgd::load_experiment_data(cfg);
  for (double lambda : cfg.lambdas) {
    for (auto seed : cfg.seeds) {
      const auto path = gpgd::checkpoint_path(cfg, lambda, seed);
      if (force) std::filesystem::remove(path);
      const auto net = gpgd::obtain_prior(cfg, data.train, lambda, seed);
      const auto probe = gpgd::probe_set(net.dims().front(), cfg.train_config(lambda, seed));
      std::printf("lambda=%s seed=%llu probe_mean_psi=%.6f -> %s\n", gpgd::format_double(lambda).c_str(),
                  static_cast<unsigned long long>(seed), gpgd::sor_value(net, probe), path.string().c_str());
    }
  }
  return kOk;
}

int cmd_solve(const Common& c, std::size_t threads) {
  const auto cfg = build_config(c);
  const auto result = gpgd::run_experiment(cfg, {threads, true});
  std::printf("config %s, %zu rows\n", result.config_hash.c_str(), result.rows.size());
  std::printf("%-8s %6s %10s %8s %12s %8s %6s\n", "lambda", "count", "psnr_mean", "std", "conv_mean", "std", "never");
  for (const auto& a : result.aggregates)
    std::printf("%-8s %6zu %10.3f %8.3f %12.2f %8.2f %6zu\n", gpgd::format_double(a.lambda).c_str(), a.count,
                a.psnr_mean, a.psnr_std, a.conv_mean, a.conv_std, a.never);
  std::cout << "results in " << (cfg.out / "reports").string() << '\n';
  return kOk;
}

struct EstimateArgs {
  std::string set = "ksparse";
  std::size_t n = 32;
  std::size_t m = 16;
  std::size_t k = 2;
  std::size_t lines = 5;
  std::size_t samples = 10000;
  double t = 0.0;
  double u = 0.0;
  std::string checkpoint;
};

int cmd_estimate(const Common& c, const EstimateArgs& e) {
  const auto cfg = build_config(c);
  const std::uint64_t seed = cfg.seeds.front();
  nlohmann::json out;
  out["seed"] = seed;

  if (!e.checkpoint.empty()) {
    const auto net = gpgd::load_checkpoint(e.checkpoint);
    gpgd::TrainConfig tc;
    tc.seed = seed;
    tc.probe_points = e.samples;
    std::size_t degenerate = 0;
    const double mean_psi = gpgd::sor_value(net, gpgd::probe_set(net.dims().front(), tc), &degenerate);
    out["checkpoint"] = e.checkpoint;
    out["probe_mean_psi"] = mean_psi;
    out["probe_points"] = e.samples;
    out["degenerate"] = degenerate;
  } else {
    const auto set = e.set == "lines" ? gpgd::ModelSet::random_lines(e.lines, e.n, seed) : gpgd::ModelSet::k_sparse(e.k, e.n);
    const auto p = e.t > 0.0 || e.u > 0.0 ? gpgd::make_perturbed_projector(set, e.t, e.u, seed)
                                          : gpgd::make_exact_projector(set);
    const auto a = gpgd::make_gaussian_operator(e.m, e.n, seed);
    const double gamma = gpgd::default_step_size(a);
    out["set"] = e.set;
    out["projector"] = p.describe();
    out["gamma"] = gamma;
    if (e.set == "ksparse") out["ric_exact"] = gpgd::ric_exact_ksparse(a, gamma, e.k);
    out["ric_sampled"] = gpgd::ric_sampled(a, gamma, set, e.samples, seed);
    auto lip = gpgd::restricted_lipschitz_sampled(p, set, e.samples, seed, gpgd::local_sampler(1.0));
    out["lipschitz"] = lip;
    if (set.is_homogeneous_lines()) out["orthogonality"] = gpgd::orthogonality_report(set, p, e.samples, seed);
  }
  const auto path = cfg.out / "reports" / "estimate.json";
  gpgd::write_file_bytes(path, out.dump(2) + "\n");
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const Common& c, bool quick, std::optional<double> slack) {
  gpgd::VerifyConfig vc;
  if (slack) vc.slack = *slack;
  if (!c.seeds.empty()) vc.seed = c.seeds.front();
  if (quick) {
    vc.recovery_seeds = 10;
    vc.lipschitz_samples = 10000;
    vc.orth_samples = 2000;
  }
  const std::filesystem::path out = c.out.empty() ? "out" : c.out;
  const auto report = gpgd::verify_theorems(vc);
  gpgd::write_csv(out / "reports" / "verify.csv", gpgd::verify_table(report));
  const auto text = gpgd::verify_text(report);
  gpgd::write_file_bytes(out / "reports" / "verify.txt", text);
  std::cout << text;
  return report.passed() ? kOk : kAssertionFailures;
}

int cmd_report(const Common& c) {
  const std::filesystem::path dir = c.out.empty() ? "out" : c.out;
  const auto summary = gpgd::report(dir);
  std::cout << summary.text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized projected gradient descent with learned projective priors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gpgd 0.1.0");

  Common common;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset to OUT/data/");
  std::string format = "csv";
  add_common(gen, common);
  gen->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "idx"}));

  auto* train = app.add_subcommand("train", "train one prior per (lambda, seed) into OUT/checkpoints/");
  bool force = false;
  add_common(train, common);
  train->add_flag("--force", force, "retrain even when a checkpoint exists");

  auto* solve = app.add_subcommand("solve", "run the GPGD sweep over (lambda, seed, test item)");
  std::size_t threads = 0;
  add_common(solve, common);
  solve->add_option("--threads", threads, "worker threads (0: all cores)");

  auto* estimate = app.add_subcommand("estimate", "estimate RIC, restricted Lipschitz and orthogonality constants");
  EstimateArgs est;
  add_common(estimate, common);
  estimate->add_option("--model", est.set, "model set")->check(CLI::IsMember({"ksparse", "lines"}));
  estimate->add_option("--n", est.n, "signal dimension");
  estimate->add_option("--m", est.m, "measurements");
  estimate->add_option("--k", est.k, "sparsity");
  estimate->add_option("--lines", est.lines, "number of lines");
  estimate->add_option("--samples", est.samples, "Monte-Carlo samples");
  estimate->add_option("--t", est.t, "perturbed projector: tangential scale");
  estimate->add_option("--u", est.u, "perturbed projector: normal scale");
  estimate->add_option("--checkpoint", est.checkpoint, "report mean psi of a trained prior instead")
      ->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify-theorems", "check the recovery and Lipschitz bounds on synthetic models");
  bool quick = false;
  add_common(verify, common);
  verify->add_flag("--quick", quick, "fewer seeds and samples");
  std::optional<double> slack;
  verify->add_option("--slack", slack, "tolerance added to every right-hand side (default 1e-9)");

  auto* rep = app.add_subcommand("report", "merge results*.csv under OUT into reports/summary.{csv,txt}");
  add_common(rep, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, format);
    if (train->parsed()) return cmd_train(common, force);
    if (solve->parsed()) return cmd_solve(common, threads);
    if (estimate->parsed()) return cmd_estimate(common, est);
    if (verify->parsed()) return cmd_verify(common, quick, slack);
    if (rep->parsed()) return cmd_report(common);
  } catch (const gpgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
