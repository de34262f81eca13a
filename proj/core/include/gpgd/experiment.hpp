#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpgd/dataset.hpp"
#include "gpgd/dense_net.hpp"
#include "gpgd/experiment_config.hpp"
#include "gpgd/io.hpp"
#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"
#include "gpgd/solver.hpp"

namespace gpgd {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Training items first, then `test_count` held-out items.
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

/// The operator for one (seed, test item). It does not depend on lambda, so
/// every prior sees the same A and the same noise.
MeasurementOperator build_operator(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t item);
std::uint64_t noise_seed(std::uint64_t seed, std::size_t item);
std::uint64_t net_init_seed(std::uint64_t seed);

std::filesystem::path checkpoint_path(const ExperimentConfig& cfg, double lambda, std::uint64_t seed);

/// Loads the (lambda, seed) checkpoint, or trains and saves it when
/// cfg.train_inline is set. Throws ExperimentError for a missing checkpoint.
DenseNet obtain_prior(const ExperimentConfig& cfg, const Dataset& train, double lambda, std::uint64_t seed);

struct CellRow {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t item = 0;
  double psnr_db = 0.0;  // at the best-PSNR iterate
  std::optional<std::size_t> convergence_iter;
  std::size_t best_index = 0;
  double final_rel_err = 0.0;
  double seconds = 0.0;  // wall clock, kept out of every CSV
};

/// One GPGD recovery: y = A truth + e, best-PSNR iterate, convergence
/// iteration against it. Fills every CellRow field except lambda, seed, item.
CellRow solve_item(const MeasurementOperator& a, const Vector& truth, const Projector& p, double noise_sigma,
                   std::uint64_t noise_seed, const GpgdSpec& gpgd, double threshold, GpgdTrace* trace = nullptr);

struct LambdaAggregate {
  double lambda = 0.0;
  std::size_t count = 0;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  double conv_mean = 0.0;  // over converged cells
  double conv_std = 0.0;
  std::size_t never = 0;
};

struct ExperimentResult {
  std::string config_hash;
  std::vector<CellRow> rows;  // ordered by lambda, seed, item
  std::vector<LambdaAggregate> aggregates;
};

struct RunOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
  bool write_files = true;
};

/// Sweeps every (lambda, seed) cell. Files under cfg.out:
///   checkpoints/lambda-L_seed-S.ckpt
///   traces/train_lambda-L_seed-S.csv, traces/lambda-L_seed-S_item-I.csv
///   reports/cells/lambda-L_seed-S.csv, reports/results.csv,
///   reports/aggregate.csv, reports/timing.txt
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::vector<LambdaAggregate> aggregate_rows(const std::vector<CellRow>& rows);

std::vector<std::string> results_header();
std::vector<std::string> results_row(const std::string& hash, const ExperimentConfig& cfg, const CellRow& row);

struct ReportSummary {
  CsvTable table;
  std::string text;
  std::size_t runs = 0;
};

/// Merges every results*.csv below `dir` (one file per run). Per (problem,
/// lambda) it reports the mean over runs of each run's mean PSNR and mean
/// convergence iteration, with the population std across runs. Writes
/// dir/reports/summary.csv and summary.txt. Throws ExperimentError on a
/// schema mismatch or when no result file exists.
ReportSummary report(const std::filesystem::path& dir, bool write_files = true);

}  // namespace gpgd
