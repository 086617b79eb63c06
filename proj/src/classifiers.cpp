// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <thread>

#include "esf_terms.hpp"
#include "pex/error.hpp"

namespace pex {

using detail::Extended;

namespace {

// Scores closer than this (relative to their magnitude) count as tied.
constexpr double kTieTolerance = 1e-12;

bool beats(double candidate, double best) {
  return candidate > best + kTieTolerance * std::max(1.0, std::abs(best));
}

void check_inputs(const LabeledDataset& train, const TestSet& test, const ClassPsi& psi) {
  if (train.features() != test.features()) {
    throw DomainError(fmt::format("training data has {} features, test data has {}",
                                  train.features(), test.features()));
  }
  if (!psi.is_shared() && psi.size() != train.classes()) {
    throw DomainError(fmt::format("{} per-class psi values for {} classes", psi.size(),
                                  train.classes()));
  }
}

void check_labeling(const LabeledDataset& train, const TestSet& test, const Labeling& labels) {
  if (labels.size() != test.size()) {
    throw DomainError(fmt::format("labeling has {} entries for {} test items", labels.size(),
                                  test.size()));
  }
  for (std::size_t c : labels.classes) {
    if (c >= train.classes()) {
      throw DomainError(fmt::format("class index {} out of range (k={})", c, train.classes()));
    }
  }
}

Extended log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  Extended sum = 0;
  for (double v : values) sum += std::exp(static_cast<Extended>(v) - peak);
  return peak + std::log(sum);
}

// Training-side quantities of one (class, feature) cell, computed once.
struct Cell {
  const SpeciesCounts* counts = nullptr;
  PartitionStat stat;
  Extended log_config = 0;  // log p(z^(c)) for this feature
  Extended log_suff = 0;    // sufficient part of the Ewens formula
  Extended log_arrangements = 0;
  double psi = 1.0;
};

// Evaluates the predictive scores for arbitrary labelings of one test set.
// Const after construction, so one instance can be shared by worker threads.
class Evaluator {
 public:
  Evaluator(const LabeledDataset& train, const TestSet& test, const ClassPsi& psi)
      : train_(train), test_(test), k_(train.classes()), d_(train.features()) {
    check_inputs(train, test, psi);
    cells_.resize(k_ * d_);
    for (std::size_t c = 0; c < k_; ++c) {
      for (std::size_t f = 0; f < d_; ++f) {
        Cell& cell = cells_[c * d_ + f];
        cell.counts = &train.counts(c, f);
        cell.stat = partition_stat_from_counts(*cell.counts);
        cell.psi = psi[c].value();
        cell.log_config = detail::configuration(cell.stat, cell.psi);
        cell.log_suff = detail::esf_sufficient(cell.stat, cell.psi);
        cell.log_arrangements = detail::arrangements(cell.stat);
      }
    }
    const std::size_t n = test.size();
    item_factor_.assign(n * k_, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k_; ++c) {
        Extended sum = 0;
        for (std::size_t f = 0; f < d_; ++f) sum += single_item_factor(c, f, test.value(i, f));
        item_factor_[i * k_ + c] = sum;
      }
    }
    unassigned_factor_.assign(k_, 0);
    for (std::size_t c = 0; c < k_; ++c) {
      Extended sum = 0;
      for (std::size_t f = 0; f < d_; ++f) {
        // No test observation enters the class: numerator statistic and
        // sample size are those of the training data alone.
        const Cell& cell = this->cell(c, f);
        sum += detail::configuration(cell.stat, cell.psi) - cell.log_config;
      }
      unassigned_factor_[c] = sum;
    }
  }

  std::size_t classes() const noexcept { return k_; }
  std::size_t features() const noexcept { return d_; }
  const Cell& cell(std::size_t c, std::size_t f) const { return cells_[c * d_ + f]; }

  // Statistic of the training cell merged with a block of test observations.
  PartitionStat merged_stat(std::size_t c, std::size_t f, const SpeciesCounts& block) const {
    const Cell& cell = this->cell(c, f);
    PartitionStat stat = cell.stat;
    for (const auto& [species, b] : block.entries()) stat.increase(cell.counts->count(species), b);
    return stat;
  }

  PartitionStat single_stat(std::size_t c, std::size_t f, SpeciesId species) const {
    const Cell& cell = this->cell(c, f);
    PartitionStat stat = cell.stat;
    stat.increment(cell.counts->count(species));
    return stat;
  }

  // log p(x_i, z^(c)) / p(z^(c)) for one feature.
  Extended single_item_factor(std::size_t c, std::size_t f, SpeciesId species) const {
    const Cell& cell = this->cell(c, f);
    return detail::configuration(single_stat(c, f, species), cell.psi) - cell.log_config;
  }

  std::vector<SpeciesCounts> blocks(const Labeling& labels, std::size_t f) const {
    std::vector<SpeciesCounts> out(k_);
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].add(test_.value(i, f));
    return out;
  }

  std::vector<Extended> simultaneous_by_class(const Labeling& labels) const {
    std::vector<Extended> out(k_, 0);
    for (std::size_t f = 0; f < d_; ++f) {
      const std::vector<SpeciesCounts> block = blocks(labels, f);
      for (std::size_t c = 0; c < k_; ++c) {
        if (block[c].empty()) continue;
        const Cell& cell = this->cell(c, f);
        out[c] += detail::configuration(merged_stat(c, f, block[c]), cell.psi) - cell.log_config;
      }
    }
    return out;
  }

  Extended simultaneous(const Labeling& labels) const {
    Extended sum = 0;
    for (Extended v : simultaneous_by_class(labels)) sum += v;
    return sum;
  }

  // Class blocks first, then the items inside each block.
  Extended marginal_si(const Labeling& labels) const {
    Extended sum = 0;
    for (std::size_t c = 0; c < k_; ++c) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) sum += item_factor_[i * k_ + c];
      }
    }
    return sum;
  }

  // Items in order, every class contributing; unassigned classes give the
  // training-only factor.
  Extended marginal_se(const Labeling& labels) const {
    Extended sum = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t c = 0; c < k_; ++c) {
        sum += labels[i] == c ? item_factor_[i * k_ + c] : unassigned_factor_[c];
      }
    }
    return sum;
  }

  Extended evaluate(Predictive predictive, const Labeling& labels) const {
    switch (predictive) {
      case Predictive::simultaneous:
        return simultaneous(labels);
      case Predictive::marginal_si:
        return marginal_si(labels);
      case Predictive::marginal_se:
        return marginal_se(labels);
    }
    return 0;
  }

 private:
  const LabeledDataset& train_;
  const TestSet& test_;
  std::size_t k_;
  std::size_t d_;
  std::vector<Cell> cells_;
  std::vector<Extended> item_factor_;       // [i * k + c], summed over features
  std::vector<Extended> unassigned_factor_;  // [c]
};

std::vector<double> evaluate_space(const Evaluator& eval, const LabelingSpace& space,
                                   Predictive predictive, unsigned workers) {
  std::vector<double> scores(space.size());
  workers = std::max(1u, workers);
  if (workers == 1 || space.size() < 2) {
    for (auto it = space.begin(); it != space.end(); ++it) {
      scores[it.index()] = static_cast<double>(eval.evaluate(predictive, *it));
    }
    return scores;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint64_t idx = w; idx < space.size(); idx += workers) {
        scores[idx] = static_cast<double>(eval.evaluate(predictive, space.at(idx)));
      }
    });
  }
  pool.clear();
  return scores;
}

}  // namespace

LabeledDataset::LabeledDataset(std::size_t num_classes, std::size_t num_features)
    : features_(num_features), counts_(num_classes, std::vector<SpeciesCounts>(num_features)) {
  if (num_classes == 0) throw DomainError("a dataset needs at least one class");
  if (num_features == 0) throw DomainError("items need at least one feature");
}

LabeledDataset LabeledDataset::single_feature(std::vector<SpeciesCounts> classes) {
  LabeledDataset out(classes.size(), 1);
  for (std::size_t c = 0; c < classes.size(); ++c) out.counts_[c][0] = std::move(classes[c]);
  return out;
}

const SpeciesCounts& LabeledDataset::counts(std::size_t c, std::size_t f) const {
  return counts_.at(c).at(f);
}

void LabeledDataset::add(std::size_t c, std::span<const SpeciesId> item) {
  if (item.size() != features_) {
    throw DomainError(fmt::format("item has {} features, expected {}", item.size(), features_));
  }
  auto& row = counts_.at(c);
  for (std::size_t f = 0; f < features_; ++f) row[f].add(item[f]);
}

std::uint64_t LabeledDataset::class_size(std::size_t c) const { return counts(c, 0).total(); }

std::uint64_t LabeledDataset::size() const {
  std::uint64_t m = 0;
  for (std::size_t c = 0; c < classes(); ++c) m += class_size(c);
  return m;
}

TestSet::TestSet(std::size_t num_features) : features_(num_features) {
  if (num_features == 0) throw DomainError("items need at least one feature");
}

TestSet TestSet::single_feature(std::vector<SpeciesId> items) {
  TestSet out(1);
  out.values_ = std::move(items);
  return out;
}

void TestSet::add(std::span<const SpeciesId> item) {
  if (item.size() != features_) {
    throw DomainError(fmt::format("item has {} features, expected {}", item.size(), features_));
  }
  values_.insert(values_.end(), item.begin(), item.end());
}

std::span<const SpeciesId> TestSet::item(std::size_t i) const {
  if (i >= size()) throw DomainError("test item index out of range");
  return std::span<const SpeciesId>(values_).subspan(i * features_, features_);
}

ClassPsi::ClassPsi(std::vector<Psi> per_class) : per_class_(std::move(per_class)) {
  if (per_class_.empty()) throw DomainError("per-class psi list is empty");
}

Psi ClassPsi::operator[](std::size_t c) const {
  if (per_class_.empty()) return shared_;
  return per_class_.at(c);
}

std::string_view to_string(Predictive p) noexcept {
  switch (p) {
    case Predictive::simultaneous:
      return "simultaneous";
    case Predictive::marginal_si:
      return "marginal_si";
    case Predictive::marginal_se:
      return "marginal_se";
  }
  return "unknown";
}

LogProb simultaneous_log_pred(const LabeledDataset& train, const TestSet& test,
                              const Labeling& labels, const ClassPsi& psi) {
  check_labeling(train, test, labels);
  return static_cast<double>(Evaluator(train, test, psi).simultaneous(labels));
}

std::vector<LogProb> simultaneous_class_log_factors(const LabeledDataset& train,
                                                    const TestSet& test, const Labeling& labels,
                                                    const ClassPsi& psi) {
  check_labeling(train, test, labels);
  std::vector<LogProb> out;
  for (Extended v : Evaluator(train, test, psi).simultaneous_by_class(labels)) {
    out.push_back(static_cast<double>(v));
  }
  return out;
}

LogProb marginal_si_log_pred(const LabeledDataset& train, const TestSet& test,
                             const Labeling& labels, const ClassPsi& psi) {
  check_labeling(train, test, labels);
  return static_cast<double>(Evaluator(train, test, psi).marginal_si(labels));
}

LogProb marginal_se_log_pred(const LabeledDataset& train, const TestSet& test,
                             const Labeling& labels, const ClassPsi& psi) {
  check_labeling(train, test, labels);
  return static_cast<double>(Evaluator(train, test, psi).marginal_se(labels));
}

PosteriorTable posterior_over_labelings(const LabeledDataset& train, const TestSet& test,
                                        const ClassPsi& psi, Predictive predictive,
                                        std::uint64_t cap, unsigned workers) {
  const LabelingSpace space(test.size(), train.classes(), cap);
  const Evaluator eval(train, test, psi);
  std::vector<double> scores = evaluate_space(eval, space, predictive, workers);

  const double log_prior =
      -static_cast<double>(test.size()) * std::log(static_cast<double>(train.classes()));
  for (double& s : scores) s += log_prior;
  const Extended normalizer = log_sum_exp(scores);

  PosteriorTable table;
  table.log_normalizer = static_cast<double>(normalizer);
  table.entries.reserve(scores.size());
  for (auto it = space.begin(); it != space.end(); ++it) {
    table.entries.push_back(
        {*it, static_cast<double>(static_cast<Extended>(scores[it.index()]) - normalizer)});
  }
  return table;
}

Labeling classify_marginal(const LabeledDataset& train, const TestSet& test,
                           const ClassPsi& psi) {
  check_inputs(train, test, psi);
  Labeling out;
  out.classes.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::size_t best_class = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < train.classes(); ++c) {
      double score = 0.0;
      for (std::size_t f = 0; f < train.features(); ++f) {
        score += predictive_single_log(train.counts(c, f), test.value(i, f), psi[c]);
      }
      if (c == 0 || beats(score, best)) {
        best = score;
        best_class = c;
      }
    }
    out.classes.push_back(best_class);
  }
  return out;
}

SimultaneousResult classify_simultaneous(const LabeledDataset& train, const TestSet& test,
                                         const ClassPsi& psi, SearchMode mode,
                                         std::uint64_t cap, unsigned workers) {
  SimultaneousResult result;
  if (mode == SearchMode::exact) {
    const PosteriorTable table =
        posterior_over_labelings(train, test, psi, Predictive::simultaneous, cap, workers);
    const PosteriorEntry* best = &table.entries.front();
    for (const PosteriorEntry& e : table.entries) {
      if (beats(e.log_posterior, best->log_posterior)) best = &e;
    }
    result.labeling = best->labeling;
    result.log_posterior = best->log_posterior;
    result.log_predictive = simultaneous_log_pred(train, test, result.labeling, psi);
    return result;
  }

  check_inputs(train, test, psi);
  const std::size_t k = train.classes();
  const std::size_t d = train.features();
  // working[c][f]: training counts plus test items committed so far.
  std::vector<std::vector<SpeciesCounts>> working(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < d; ++f) working[c].push_back(train.counts(c, f));
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::size_t best_class = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double score = 0.0;
      for (std::size_t f = 0; f < d; ++f) {
        score += predictive_single_log(working[c][f], test.value(i, f), psi[c]);
      }
      if (c == 0 || beats(score, best)) {
        best = score;
        best_class = c;
      }
    }
    for (std::size_t f = 0; f < d; ++f) working[best_class][f].add(test.value(i, f));
    result.labeling.classes.push_back(best_class);
  }
  result.log_predictive = simultaneous_log_pred(train, test, result.labeling, psi);
  result.approximate = true;
  return result;
}

double log_coefficient_ratio(std::uint64_t train_size, std::uint64_t test_size, Psi psi) {
  // Term j of the product pair collapses to
  //   (m+1+j)(psi+m) / ((m+1)(psi+m+j)) = 1 + j(psi-1) / ((m+1)(psi+m+j)).
  const Extended m = static_cast<Extended>(train_size);
  const Extended shift = static_cast<Extended>(psi.value()) - 1;
  Extended sum = 0;
  for (std::uint64_t j = 1; j < test_size; ++j) {
    const Extended jj = static_cast<Extended>(j);
    sum += std::log1p(jj * shift / ((m + 1) * (m + psi.value() + jj)));
  }
  return static_cast<double>(sum);
}

RatioDecomposition decompose_ratio(const LabeledDataset& train, const TestSet& test,
                                   const Labeling& labels, const ClassPsi& psi,
                                   MarginalKind which) {
  check_labeling(train, test, labels);
  const Evaluator eval(train, test, psi);
  const std::size_t k = train.classes();
  const std::size_t d = train.features();

  RatioDecomposition out;
  out.per_class.resize(k);
  std::vector<Extended> suff(k, 0);
  for (std::size_t f = 0; f < d; ++f) {
    const std::vector<SpeciesCounts> blocks = eval.blocks(labels, f);
    for (std::size_t c = 0; c < k; ++c) {
      const Cell& cell = eval.cell(c, f);
      // Sufficient part of one numerator statistic relative to the training
      // statistic: Ewens sufficient terms minus the arrangement counts.
      auto relative = [&](const PartitionStat& stat) {
        return (detail::esf_sufficient(stat, cell.psi) - cell.log_suff) -
               (detail::arrangements(stat) - cell.log_arrangements);
      };
      Extended s = blocks[c].empty() ? 0 : relative(eval.merged_stat(c, f, blocks[c]));
      if (which == MarginalKind::si) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
          if (labels[i] == c) s -= relative(eval.single_stat(c, f, test.value(i, f)));
        }
      } else {
        for (std::size_t i = 0; i < labels.size(); ++i) {
          s -= labels[i] == c ? relative(eval.single_stat(c, f, test.value(i, f)))
                              : relative(cell.stat);
        }
      }
      suff[c] += s;
    }
  }

  Extended total_coeff = 0;
  Extended total_suff = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassRatio& row = out.per_class[c];
    row.train_size = train.class_size(c);
    row.test_size = static_cast<std::uint64_t>(std::count(labels.classes.begin(),
                                                          labels.classes.end(), c));
    const Extended coeff =
        static_cast<Extended>(d) * log_coefficient_ratio(row.train_size, row.test_size, psi[c]);
    row.log_coeff = static_cast<double>(coeff);
    row.log_suff = static_cast<double>(suff[c]);
    total_coeff += coeff;
    total_suff += suff[c];
  }
  out.log_coeff = static_cast<double>(total_coeff);
  out.log_suff = static_cast<double>(total_suff);
  return out;
}

}  // namespace pex
