#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpgd/signal.hpp"
#include "gpgd/training.hpp"

namespace gpgd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Profile { Desk, Mnist };

enum class ProblemKind { Inpainting, SuperRes, Deblur, Sparse };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Inpainting;
  double ratio = 0.6;           // inpainting
  std::size_t factor = 2;       // superres
  int kernel_size = 5;          // superres, deblur
  double kernel_sigma = 1.0;    // superres, deblur
  std::size_t k = 2;            // sparse
  std::size_t m = 16;           // sparse

  bool operator==(const ProblemSpec&) const = default;
};

enum class DatasetSource { Synthetic, Idx, Csv };

struct DatasetSpec {
  DatasetSource source = DatasetSource::Synthetic;
  std::string name = "bars";  // synthetic generator
  std::string path;           // idx / csv
  Shape shape{8, 8};
  std::size_t count = 2000;   // training items
  std::size_t test_count = 20;
  std::uint64_t seed = 7;

  bool operator==(const DatasetSpec&) const = default;
};

struct NetSpec {
  std::vector<std::size_t> dims{64, 32, 16, 32, 64};
  double slope = 0.01;
  TrainMode mode = TrainMode::AE;
  double xi = 0.1;
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  double tau = 2e-3;
  double tau_final_fraction = 0.05;

  bool operator==(const NetSpec&) const = default;
};

/// The serializable part of GpgdConfig. A missing gamma means 1 / |A|^2.
struct GpgdSpec {
  std::optional<double> gamma;
  std::size_t max_iters = 150;
  std::optional<double> stagnation_tol;

  bool operator==(const GpgdSpec&) const = default;
};

struct ExperimentConfig {
  Profile profile = Profile::Desk;
  ProblemSpec problem;
  double noise_sigma = 0.02;
  std::vector<double> lambdas{0.0, 0.4};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  DatasetSpec dataset;
  NetSpec net;
  GpgdSpec gpgd;
  double threshold = 0.01;
  bool train_inline = true;  // otherwise checkpoints must already exist
  std::filesystem::path out = "out";

  bool operator==(const ExperimentConfig&) const = default;

  static ExperimentConfig defaults(Profile profile);

  void validate() const;

  /// TrainConfig for one (lambda, seed) cell.
  TrainConfig train_config(double lambda, std::uint64_t seed) const;
};

/// Flat `key = value` text. `#` starts a comment. The `gpgd` key also takes a
/// JSON object ({"gamma":..., "max_iters":..., "stagnation_tol":...}).
/// `profile` is applied first so the remaining keys override its defaults.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Every key, in a fixed order; parse_config(print_config(c)) == c.
std::string print_config(const ExperimentConfig& cfg);

/// FNV-1a of print_config with `out` cleared, 16 hex digits: the same
/// experiment written to two directories hashes the same.
std::string config_hash(const ExperimentConfig& cfg);

std::string to_string(Profile p);
std::string to_string(ProblemKind k);
std::string to_string(DatasetSource s);
Profile parse_profile(const std::string& s);

}  // namespace gpgd
