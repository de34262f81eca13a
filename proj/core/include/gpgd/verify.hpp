#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpgd/io.hpp"

namespace gpgd {

struct VerifyConfig {
  std::uint64_t seed = 2024;
  double slack = 1e-9;

  // Sparse recovery with hard thresholding.
  std::size_t recovery_seeds = 100;
  std::size_t n = 32;
  std::size_t m = 16;
  std::size_t k = 2;
  std::size_t iters = 150;
  double noise_sigma = 0.02;

  // Restricted Lipschitz sampling.
  std::size_t lipschitz_samples = 100'000;
  std::size_t lipschitz_n = 16;
  std::vector<std::size_t> lipschitz_ks{1, 2, 3};

  // Perturbed projectors on a union of lines.
  std::size_t lines = 5;
  std::size_t lines_dim = 8;
  std::vector<double> perturb_t{0.05, 0.1, 0.2};
  double perturb_u = 0.0;
  std::size_t orth_samples = 10'000;
  double inflation = 1.1;
};

enum class CheckStatus { Pass, Fail, Skip };

/// One aggregated assertion. `lhs <= rhs` is the checked inequality at the
/// worst witness; Skip marks a check whose hypothesis never held.
struct Check {
  std::string suite;
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::size_t checked = 0;  // instances evaluated
  std::size_t excluded = 0; // instances where the hypothesis failed
  double lhs = 0.0;
  double rhs = 0.0;
  std::string witness;
};

struct VerifyReport {
  std::vector<Check> checks;

  std::size_t failures() const;
  bool passed() const { return failures() == 0; }
};

/// Runs the recovery (noiseless and noisy), restricted Lipschitz, triangle
/// chain and orthogonality suites. Failures are entries, never exceptions.
VerifyReport verify_theorems(const VerifyConfig& cfg);

std::string to_string(CheckStatus s);

/// suite,check,status,checked,excluded,lhs,rhs,witness
CsvTable verify_table(const VerifyReport& report);
std::string verify_text(const VerifyReport& report);

}  // namespace gpgd
