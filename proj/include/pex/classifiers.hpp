// Apache License, Version 2.0, refer to LICENSE.txt

// Simultaneous and marginal predictive classifiers under partition
// exchangeability.
//
// Every class c carries training counts z^(c). A test labeling S assigns the
// n test items to classes. The three predictive scores are
//
//   simultaneous  prod_c    p(x^(c), z^(c)) / p(z^(c))
//   marginal_si   prod_c    prod_{i : S_i = c} p(x_i, z^(c)) / p(z^(c))
//   marginal_se   prod_i    prod_c p(x_i^{I_c(i)}, z^(c)) / p(z^(c))
//
// where p(.) is the probability of the class's observation sequence under the
// Ewens sampling formula. In marginal_se the factor of a class the item is not
// assigned to carries no test observation and is exactly 1.
//
// With d > 1 features per item the per-feature scores add in the log domain.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pex/enumerate.hpp"
#include "pex/esf.hpp"

namespace pex {

// Training counts grouped by class label, one SpeciesCounts per feature.
class LabeledDataset {
 public:
  explicit LabeledDataset(std::size_t num_classes, std::size_t num_features = 1);

  static LabeledDataset single_feature(std::vector<SpeciesCounts> classes);

  std::size_t classes() const noexcept { return counts_.size(); }
  std::size_t features() const noexcept { return features_; }

  const SpeciesCounts& counts(std::size_t c, std::size_t f = 0) const;

  // Adds one training item of class c; `item` holds one value per feature.
  void add(std::size_t c, std::span<const SpeciesId> item);

  // m_c, the number of training items in class c.
  std::uint64_t class_size(std::size_t c) const;
  std::uint64_t size() const;

 private:
  std::size_t features_;
  std::vector<std::vector<SpeciesCounts>> counts_;
};

// Ordered test items; item i has one species id per feature.
class TestSet {
 public:
  explicit TestSet(std::size_t num_features = 1);

  static TestSet single_feature(std::vector<SpeciesId> items);

  void add(std::span<const SpeciesId> item);

  std::size_t size() const noexcept { return features_ == 0 ? 0 : values_.size() / features_; }
  std::size_t features() const noexcept { return features_; }
  bool empty() const noexcept { return values_.empty(); }

  SpeciesId value(std::size_t i, std::size_t f = 0) const { return values_.at(i * features_ + f); }
  std::span<const SpeciesId> item(std::size_t i) const;

 private:
  std::size_t features_;
  std::vector<SpeciesId> values_;
};

// Either one psi shared by every class or one psi per class.
class ClassPsi {
 public:
  ClassPsi(Psi shared) : shared_(shared) {}  // NOLINT(google-explicit-constructor)
  explicit ClassPsi(std::vector<Psi> per_class);

  Psi operator[](std::size_t c) const;
  bool is_shared() const noexcept { return per_class_.empty(); }
  std::size_t size() const noexcept { return per_class_.size(); }

 private:
  Psi shared_{1.0};
  std::vector<Psi> per_class_;
};

LogProb simultaneous_log_pred(const LabeledDataset& train, const TestSet& test,
                              const Labeling& labels, const ClassPsi& psi);

// The per-class factors whose sum is simultaneous_log_pred.
std::vector<LogProb> simultaneous_class_log_factors(const LabeledDataset& train,
                                                    const TestSet& test, const Labeling& labels,
                                                    const ClassPsi& psi);

LogProb marginal_si_log_pred(const LabeledDataset& train, const TestSet& test,
                             const Labeling& labels, const ClassPsi& psi);

LogProb marginal_se_log_pred(const LabeledDataset& train, const TestSet& test,
                             const Labeling& labels, const ClassPsi& psi);

enum class Predictive { simultaneous, marginal_si, marginal_se };

std::string_view to_string(Predictive p) noexcept;

struct PosteriorEntry {
  Labeling labeling;
  LogProb log_posterior = 0.0;
};

struct PosteriorTable {
  // One entry per labeling, lexicographic order.
  std::vector<PosteriorEntry> entries;
  // log sum_S predictive(S) k^-n
  LogProb log_normalizer = 0.0;
};

// Posterior over all k^n labelings under a uniform prior. `workers` > 1
// shards the labeling indices; the reduction order is fixed, so the result
// does not depend on the worker count.
PosteriorTable posterior_over_labelings(const LabeledDataset& train, const TestSet& test,
                                        const ClassPsi& psi, Predictive predictive,
                                        std::uint64_t cap = kDefaultLabelingCap,
                                        unsigned workers = 1);

// Each item independently to argmax_c of its single-item predictive. Ties go
// to the lowest class index.
Labeling classify_marginal(const LabeledDataset& train, const TestSet& test,
                           const ClassPsi& psi);

enum class SearchMode { exact, greedy };

struct SimultaneousResult {
  Labeling labeling;
  LogProb log_predictive = 0.0;  // simultaneous score at `labeling`
  std::optional<LogProb> log_posterior;  // exact mode only
  bool approximate = false;
};

// exact: argmax of the posterior, lexicographically smallest among ties.
// greedy: items in input order, each committed to the class maximizing its
// predictive given that class's training counts plus the test items already
// committed to it. Greedy results are flagged approximate.
SimultaneousResult classify_simultaneous(const LabeledDataset& train, const TestSet& test,
                                         const ClassPsi& psi, SearchMode mode,
                                         std::uint64_t cap = kDefaultLabelingCap,
                                         unsigned workers = 1);

enum class MarginalKind { si, se };

struct ClassRatio {
  std::uint64_t train_size = 0;  // m_c
  std::uint64_t test_size = 0;   // n_c
  double log_coeff = 0.0;
  double log_suff = 0.0;
};

// log(simultaneous / marginal) split into the factorial/rising-factorial
// coefficient and the part that depends on the sufficient statistics.
struct RatioDecomposition {
  double log_coeff = 0.0;
  double log_suff = 0.0;
  std::vector<ClassRatio> per_class;
};

// log C for a single class and feature:
//   (psi+m)^n / [(psi+m)...(psi+m+n-1)] * (m+1)...(m+n) / (m+1)^n.
// Exactly 0 when n <= 1 or psi == 1.
double log_coefficient_ratio(std::uint64_t train_size, std::uint64_t test_size, Psi psi);

RatioDecomposition decompose_ratio(const LabeledDataset& train, const TestSet& test,
                                   const Labeling& labels, const ClassPsi& psi,
                                   MarginalKind which);

}  // namespace pex
