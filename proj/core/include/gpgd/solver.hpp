#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpgd/operators.hpp"
#include "gpgd/projector.hpp"

namespace gpgd {

struct GpgdConfig {
  double gamma = 1.0;
  std::size_t max_iters = 150;
  std::optional<Vector> x0;  // defaults to A^T y
  bool record_full_iterates = false;
  /// Optional early stop when |res_k - res_{k-1}| <= tol * res_{k-1}. Off by default.
  std::optional<double> stagnation_tol;
};

struct IterationRecord {
  std::size_t iter = 0;
  std::optional<double> rel_err;  // |x_i - x_hat| / |x_hat|
  std::optional<double> abs_err;  // |x_i - x_hat|
  std::optional<double> psnr_db;
  double residual = 0.0;          // |A x_i - y|
};

/// Records x_0 .. x_N, N = iterations executed.
struct GpgdTrace {
  std::vector<IterationRecord> records;
  std::vector<Vector> iterates;  // empty unless record_full_iterates
  Vector final_iterate;
  std::optional<std::size_t> best_index;  // argmax PSNR when ground truth known

  std::size_t iterations() const noexcept { return records.empty() ? 0 : records.size() - 1; }
};

class GpgdDivergence : public std::runtime_error {
 public:
  GpgdDivergence(std::size_t iteration, double norm);
  std::size_t iteration() const noexcept { return iteration_; }
  double norm() const noexcept { return norm_; }

 private:
  std::size_t iteration_;
  double norm_;
};

struct GpgdResult {
  Vector x;
  GpgdTrace trace;
};

/// x_{k+1} = P(x_k) - gamma A^T (A P(x_k) - y).
GpgdResult gpgd_run(const MeasurementOperator& a, const Vector& y, const Projector& p, const GpgdConfig& cfg,
                    const std::optional<Vector>& ground_truth = std::nullopt);

/// First index with error <= threshold; nullopt means never.
std::optional<std::size_t> first_below(std::span<const double> rel_errors, double threshold);

/// First i with |x_i - x_star| / |x_star| <= threshold. Needs full iterates.
std::optional<std::size_t> convergence_iteration(const GpgdTrace& trace, const Vector& x_star, double threshold);

struct BestIterate {
  std::size_t index = 0;
  Vector x;
};

/// Argmax of per-iteration PSNR (lowest index on ties). Needs full iterates
/// and a ground truth.
BestIterate best_iterate(const GpgdTrace& trace);
std::size_t best_index(std::span<const double> psnr_db);

/// 1 / |A|_2^2 by power iteration.
double default_step_size(const MeasurementOperator& a);

/// iter,rel_err,psnr_db,residual
std::string trace_csv(const GpgdTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const GpgdTrace& trace);

}  // namespace gpgd
