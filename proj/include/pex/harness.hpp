// Apache License, Version 2.0, refer to LICENSE.txt

// Simulation driver for the convergence of the simultaneous and marginal
// predictive scores as the training (or test) sample grows, plus the
// maximum-likelihood estimate of psi from the number of distinct species.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace pex {

enum class Generator { crp, paintbox };

std::string_view to_string(Generator g) noexcept;

struct ConvergenceConfig {
  std::size_t k = 2;
  std::size_t n = 6;             // test items (training sweep)
  double psi_true = 1.0;         // CRP generator
  double psi_model = 1.0;        // psi used by the classifiers
  std::vector<std::uint64_t> m_grid;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  Generator generator = Generator::crp;
  double theta = 0.0;            // paintbox generator
  // Fraction of the training data per class; empty means m_c = m / k.
  std::vector<double> class_shares;
  // Test sweep: fixed training size m, growing n.
  std::uint64_t m = 0;
  std::vector<std::uint64_t> n_grid;
  // Adds an argmax-agreement column (exact simultaneous vs marginal).
  bool report_argmax = false;
  unsigned workers = 1;
};

// Throws DomainError. `test_sweep` selects the n-grid checks instead of the
// m-grid checks.
void validate(const ConvergenceConfig& config, bool test_sweep = false);

// Per-class training sizes for a total of m under the balance rule.
std::vector<std::uint64_t> class_sizes(const ConvergenceConfig& config, std::uint64_t m);

struct ConvergenceRow {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::size_t replicate = 0;
  double log_ratio_si = 0.0;
  double log_ratio_se = 0.0;
  double log_coeff = 0.0;
  double log_suff = 0.0;
  std::optional<bool> argmax_agree;
};

// One row per (m, replicate), sorted by m then replicate. Ratios are taken at
// the true test labeling.
std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& config);

// One row per (n, replicate) with the training size fixed at config.m.
std::vector<ConvergenceRow> run_test_growth(const ConvergenceConfig& config);

enum class SweepAxis { train, test };

// Header m,replicate,log_ratio_si,log_ratio_se,log_coeff,log_suff (first
// column n for the test sweep), then argmax_agree when requested.
void write_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows, SweepAxis axis,
               bool argmax_column = false);

enum class PsiEstimateStatus { interior, all_same, all_distinct };

std::string_view to_string(PsiEstimateStatus s) noexcept;

struct PsiEstimate {
  double value = 0.0;  // 0 for all_same, +inf for all_distinct
  PsiEstimateStatus status = PsiEstimateStatus::interior;
};

// E[K] = sum_{i < n} psi / (psi + i), the expected number of distinct species.
double expected_distinct(double psi, std::uint64_t n);

// Solves expected_distinct(psi, n) == distinct by bisection, |residual| <=
// 1e-10. Requires 1 <= distinct <= n.
PsiEstimate estimate_psi(std::uint64_t n, std::uint64_t distinct);

}  // namespace pex
