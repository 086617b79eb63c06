// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>
#include <tuple>

#include "pex/classifiers.hpp"
#include "pex/error.hpp"
#include "pex/paintbox.hpp"
#include "pex/random.hpp"

namespace pex {

namespace {

// Species ids of different classes live in disjoint ranges.
constexpr SpeciesId kClassIdStride = SpeciesId{1} << 40;

// Seed keys separating the two sweeps and the per-task streams.
constexpr std::uint64_t kTrainSweepTag = 0x7472;
constexpr std::uint64_t kTestSweepTag = 0x7465;
constexpr std::uint64_t kLabelStream = 0;

void check_grid(const std::vector<std::uint64_t>& grid, std::string_view name) {
  if (grid.empty()) throw DomainError(fmt::format("{} grid is empty", name));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) {
      throw DomainError(fmt::format("{} grid must be strictly increasing", name));
    }
  }
}

// One sampler per class, continuing from training into test draws.
class ClassSource {
 public:
  ClassSource(const ConvergenceConfig& config, std::size_t c, std::uint64_t seed) {
    if (config.generator == Generator::crp) {
      crp_.emplace(Psi(config.psi_true), seed, c * kClassIdStride + 1);
    } else {
      paintbox_.emplace(geometric_paintbox(config.theta), seed, c * kClassIdStride);
    }
  }

  SpeciesId next() { return crp_ ? crp_->next() : paintbox_->next(); }

 private:
  std::optional<CrpSampler> crp_;
  std::optional<PaintboxSampler> paintbox_;
};

ConvergenceRow simulate_row(const ConvergenceConfig& config, std::uint64_t tag,
                            std::uint64_t m, std::uint64_t n, std::size_t replicate) {
  const std::uint64_t grid_key = tag == kTrainSweepTag ? m : n;
  const std::vector<std::uint64_t> sizes = class_sizes(config, m);

  std::vector<ClassSource> sources;
  sources.reserve(config.k);
  LabeledDataset train(config.k);
  for (std::size_t c = 0; c < config.k; ++c) {
    sources.emplace_back(config, c, derive_seed(config.seed, {tag, replicate, grid_key, c + 1}));
    for (std::uint64_t j = 0; j < sizes[c]; ++j) {
      const SpeciesId s = sources[c].next();
      train.add(c, std::span<const SpeciesId>(&s, 1));
    }
  }

  Rng label_rng(derive_seed(config.seed, {tag, replicate, grid_key, kLabelStream}));
  Labeling truth;
  std::vector<SpeciesId> items;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto c = std::min(static_cast<std::size_t>(uniform01(label_rng) * config.k),
                            config.k - 1);
    truth.classes.push_back(c);
    items.push_back(sources[c].next());
  }
  const TestSet test = TestSet::single_feature(std::move(items));
  const ClassPsi psi{Psi(config.psi_model)};

  const double sim = simultaneous_log_pred(train, test, truth, psi);
  const double si = marginal_si_log_pred(train, test, truth, psi);
  const double se = marginal_se_log_pred(train, test, truth, psi);
  const RatioDecomposition parts = decompose_ratio(train, test, truth, psi, MarginalKind::si);

  ConvergenceRow row;
  row.m = m;
  row.n = n;
  row.replicate = replicate;
  row.log_ratio_si = sim - si;
  row.log_ratio_se = sim - se;
  row.log_coeff = parts.log_coeff;
  row.log_suff = parts.log_suff;
  if (config.report_argmax) {
    const Labeling marginal = classify_marginal(train, test, psi);
    const SimultaneousResult joint = classify_simultaneous(train, test, psi, SearchMode::exact);
    row.argmax_agree = marginal == joint.labeling;
  }
  return row;
}

struct Task {
  std::uint64_t m;
  std::uint64_t n;
  std::size_t replicate;
};

std::vector<ConvergenceRow> run_tasks(const ConvergenceConfig& config, std::uint64_t tag,
                                      const std::vector<Task>& tasks) {
  std::vector<ConvergenceRow> rows(tasks.size());
  const unsigned workers = std::max(1u, config.workers);
  auto work = [&](unsigned w) {
    for (std::size_t t = w; t < tasks.size(); t += workers) {
      rows[t] = simulate_row(config, tag, tasks[t].m, tasks[t].n, tasks[t].replicate);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  std::sort(rows.begin(), rows.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
    return std::tie(a.m, a.n, a.replicate) < std::tie(b.m, b.n, b.replicate);
  });
  return rows;
}

}  // namespace

std::string_view to_string(Generator g) noexcept {
  return g == Generator::crp ? "crp" : "paintbox";
}

void validate(const ConvergenceConfig& config, bool test_sweep) {
  if (config.k == 0) throw DomainError("k must be at least 1");
  if (config.replicates == 0) throw DomainError("replicates must be at least 1");
  (void)Psi(config.psi_model);
  if (config.generator == Generator::crp) {
    (void)Psi(config.psi_true);
  } else {
    (void)geometric_paintbox(config.theta);
  }
  if (!config.class_shares.empty()) {
    if (config.class_shares.size() != config.k) {
      throw DomainError("class_shares needs one entry per class");
    }
    for (double s : config.class_shares) {
      if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("class shares must be positive");
    }
  }
  auto check_divisible = [&](std::uint64_t m) {
    if (config.class_shares.empty() && m % config.k != 0) {
      throw DomainError(fmt::format("m={} is not divisible by k={}", m, config.k));
    }
  };
  if (test_sweep) {
    check_grid(config.n_grid, "n");
    check_divisible(config.m);
  } else {
    check_grid(config.m_grid, "m");
    for (std::uint64_t m : config.m_grid) check_divisible(m);
  }
}

std::vector<std::uint64_t> class_sizes(const ConvergenceConfig& config, std::uint64_t m) {
  std::vector<std::uint64_t> sizes(config.k, m / config.k);
  if (config.class_shares.empty()) return sizes;
  const double total = std::accumulate(config.class_shares.begin(), config.class_shares.end(), 0.0);
  std::uint64_t assigned = 0;
  for (std::size_t c = 0; c + 1 < config.k; ++c) {
    sizes[c] = static_cast<std::uint64_t>(
        std::floor(static_cast<double>(m) * config.class_shares[c] / total));
    assigned += sizes[c];
  }
  sizes.back() = m - assigned;
  return sizes;
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& config) {
  validate(config, false);
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < config.replicates; ++r) {
    for (std::uint64_t m : config.m_grid) tasks.push_back({m, config.n, r});
  }
  return run_tasks(config, kTrainSweepTag, tasks);
}

std::vector<ConvergenceRow> run_test_growth(const ConvergenceConfig& config) {
  validate(config, true);
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < config.replicates; ++r) {
    for (std::uint64_t n : config.n_grid) tasks.push_back({config.m, n, r});
  }
  return run_tasks(config, kTestSweepTag, tasks);
}

void write_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows, SweepAxis axis,
               bool argmax_column) {
  out << (axis == SweepAxis::train ? "m" : "n")
      << ",replicate,log_ratio_si,log_ratio_se,log_coeff,log_suff";
  if (argmax_column) out << ",argmax_agree";
  out << '\n';
  for (const ConvergenceRow& row : rows) {
    out << fmt::format("{},{},{},{},{},{}", axis == SweepAxis::train ? row.m : row.n,
                       row.replicate, row.log_ratio_si, row.log_ratio_se, row.log_coeff,
                       row.log_suff);
    if (argmax_column) {
      out << ',' << (row.argmax_agree ? (*row.argmax_agree ? "1" : "0") : "");
    }
    out << '\n';
  }
}

std::string_view to_string(PsiEstimateStatus s) noexcept {
  switch (s) {
    case PsiEstimateStatus::interior:
      return "interior";
    case PsiEstimateStatus::all_same:
      return "all_same";
    case PsiEstimateStatus::all_distinct:
      return "all_distinct";
  }
  return "unknown";
}

double expected_distinct(double psi, std::uint64_t n) {
  long double sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    sum += static_cast<long double>(psi) / (psi + static_cast<long double>(i));
  }
  return static_cast<double>(sum);
}

PsiEstimate estimate_psi(std::uint64_t n, std::uint64_t distinct) {
  if (distinct < 1 || distinct > n) {
    throw DomainError(fmt::format("need 1 <= distinct <= n, got distinct={} n={}", distinct, n));
  }
  if (distinct == n) {
    return {std::numeric_limits<double>::infinity(), PsiEstimateStatus::all_distinct};
  }
  if (distinct == 1) return {0.0, PsiEstimateStatus::all_same};

  constexpr double kTolerance = 1e-10;
  const double target = static_cast<double>(distinct);
  double lo = 0.0;
  double hi = 1.0;
  while (expected_distinct(hi, n) < target) {
    lo = hi;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 2000; ++iter) {
    mid = 0.5 * (lo + hi);
    const double residual = expected_distinct(mid, n) - target;
    if (std::abs(residual) <= kTolerance || mid == lo || mid == hi) break;
    (residual < 0.0 ? lo : hi) = mid;
  }
  return {mid, PsiEstimateStatus::interior};
}

}  // namespace pex
