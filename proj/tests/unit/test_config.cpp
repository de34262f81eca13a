#include <doctest.h>

#include "gpgd/experiment_config.hpp"

using namespace gpgd;

TEST_CASE("defaults validate and round-trip") {
  for (auto profile : {Profile::Desk, Profile::Mnist}) {
    const auto cfg = ExperimentConfig::defaults(profile);
    CHECK_NOTHROW(cfg.validate());
    CHECK(parse_config(print_config(cfg)) == cfg);
  }
  const auto mnist = ExperimentConfig::defaults(Profile::Mnist);
  CHECK(mnist.dataset.source == DatasetSource::Idx);
  CHECK(mnist.dataset.shape == Shape{28, 28});
  CHECK(mnist.net.dims.front() == 784);
}

TEST_CASE("parsing keys, comments and overrides") {
  const auto cfg = parse_config(R"(# sweep
problem = deblur
problem.kernel_size = 3   # small kernel
lambdas = 0, 0.05, 0.4
seeds = 9
gpgd = {"gamma": 0.5, "max_iters": 40}
net.mode = pnp
)",
                                {"seeds = 4,5", "out = /tmp/x"});
  CHECK(cfg.problem.kind == ProblemKind::Deblur);
  CHECK(cfg.problem.kernel_size == 3);
  CHECK(cfg.lambdas == std::vector<double>{0.0, 0.05, 0.4});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(*cfg.gpgd.gamma == 0.5);
  CHECK(cfg.gpgd.max_iters == 40);
  CHECK(cfg.net.mode == TrainMode::PnP);
  CHECK(cfg.out == "/tmp/x");
  CHECK(parse_config(print_config(cfg)) == cfg);

  const auto auto_gamma = parse_config("gpgd.gamma = auto\ngpgd.stagnation_tol = 1e-6");
  CHECK_FALSE(auto_gamma.gpgd.gamma.has_value());
  CHECK(*auto_gamma.gpgd.stagnation_tol == 1e-6);
}

TEST_CASE("profile applies before other keys") {
  const auto cfg = parse_config("net.epochs = 3\nprofile = mnist");
  CHECK(cfg.profile == Profile::Mnist);
  CHECK(cfg.net.epochs == 3);
  CHECK(cfg.dataset.shape == Shape{28, 28});
}

TEST_CASE("config errors carry a location") {
  const auto message = [](const std::string& text, const std::vector<std::string>& ov = {}) {
    try {
      parse_config(text, ov);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("seeds = 1\nbogus = 2").find("config:2") != std::string::npos);
  CHECK(message("", {"lambdas = -1"}).find("lambdas") != std::string::npos);
  CHECK(message("", {"seeds = 1", "problem.ratio = x"}).find("override 2") != std::string::npos);
  CHECK_FALSE(message("problem.ratio = 1.0").empty());
  CHECK_FALSE(message("net.dims = 10, 5, 10").empty());
  CHECK_FALSE(message("no equals sign").empty());
  CHECK_FALSE(message("profile = laptop").empty());
  CHECK_FALSE(message("gpgd = {\"gama\": 1}").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("config hash ignores the output directory") {
  auto a = ExperimentConfig::defaults(Profile::Desk);
  auto b = a;
  b.out = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.noise_sigma = 0.03;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("train config per cell") {
  const auto cfg = ExperimentConfig::defaults(Profile::Desk);
  const auto tc = cfg.train_config(0.4, 7);
  CHECK(tc.lambda == 0.4);
  CHECK(tc.epochs == cfg.net.epochs);
  CHECK(tc.tau == cfg.net.tau);
  CHECK(tc.seed != cfg.train_config(0.4, 8).seed);
}
