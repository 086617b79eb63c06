// Apache License, Version 2.0, refer to LICENSE.txt

// Ewens sampling formula, frequencies-of-frequencies statistics and the
// single-observation predictive of a partition-exchangeable class.
//
// All probabilities are returned in the log domain. Internally the formula
// terms are accumulated in extended precision so that differences of large
// log-factorials (m around 10^4..10^6) keep roughly 1e-14 absolute accuracy.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>

namespace pex {

using SpeciesId = std::uint64_t;
using LogProb = double;

// Token for a species that has not been observed yet. The alphabet is open,
// so "new" is a distinguished value rather than a reserved id.
struct NewSpecies {
  friend bool operator==(NewSpecies, NewSpecies) = default;
};
inline constexpr NewSpecies kNewSpecies{};

using Observation = std::variant<SpeciesId, NewSpecies>;

// Dispersion parameter of the Ewens sampling formula. Always finite and > 0.
class Psi {
 public:
  explicit Psi(double value);

  double value() const noexcept { return value_; }

  friend bool operator==(const Psi&, const Psi&) = default;

 private:
  double value_;
};

// Per-class species -> count table (the m_cl / n_cl arrays). Only positive
// counts are stored.
class SpeciesCounts {
 public:
  using Map = std::map<SpeciesId, std::uint64_t>;

  SpeciesCounts() = default;
  SpeciesCounts(std::initializer_list<Map::value_type> init);

  static SpeciesCounts from_observations(std::span<const SpeciesId> sequence);

  void add(SpeciesId species, std::uint64_t times = 1);

  std::uint64_t count(SpeciesId species) const noexcept;
  // Zero for kNewSpecies.
  std::uint64_t count(const Observation& species) const noexcept;

  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }
  const Map& entries() const noexcept { return counts_; }

  friend bool operator==(const SpeciesCounts&, const SpeciesCounts&) = default;

 private:
  Map counts_;
  std::uint64_t total_ = 0;
};

// Frequencies of frequencies: rho_t is the number of species seen exactly t
// times. Sparse; only non-zero rho_t are stored and sum_t t * rho_t == n().
class PartitionStat {
 public:
  using Map = std::map<std::uint64_t, std::uint64_t>;

  PartitionStat() = default;
  // Zero entries are dropped; a zero multiplicity key throws DomainError.
  explicit PartitionStat(const Map& freq_of_freq);
  PartitionStat(std::initializer_list<Map::value_type> init);

  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t rho(std::uint64_t t) const noexcept;
  // Number of distinct species, sum_t rho_t.
  std::uint64_t distinct() const noexcept;
  const Map& entries() const noexcept { return rho_; }

  // Moves one species from multiplicity `from` to `from + 1`. from == 0
  // adds a previously unseen species. Requires rho(from) > 0 when from > 0.
  void increment(std::uint64_t from);
  // Moves one species from multiplicity `from` to `from + by`.
  void increase(std::uint64_t from, std::uint64_t by);

  // "{1:2, 2:1}"; "{}" for the empty partition.
  std::string to_string() const;

  friend bool operator==(const PartitionStat&, const PartitionStat&) = default;

 private:
  Map rho_;
  std::uint64_t n_ = 0;
};

PartitionStat partition_stat_from_counts(const SpeciesCounts& counts);

SpeciesCounts merge_counts(const SpeciesCounts& train, const SpeciesCounts& test);

// Statistic of `train` with one more observation of `species`. An id absent
// from `train` behaves exactly like kNewSpecies.
PartitionStat update_stat_single(const SpeciesCounts& train, const Observation& species);

// log psi (psi + 1) ... (psi + n - 1); 0 for n == 0.
double log_rising_factorial(Psi psi, std::uint64_t n);

// log p(rho) = log [ n! / psi^(n) * prod_t (psi / t)^rho_t / rho_t! ].
LogProb esf_log_prob(const PartitionStat& rho, Psi psi);

// log of the number of distinct observation sequences (species coded by
// order of first appearance) whose statistic is rho:
// n! / (prod_t (t!)^rho_t rho_t!).
double log_arrangements(const PartitionStat& rho);

// Probability of one particular sequence with statistic rho,
// esf_log_prob(rho) - log_arrangements(rho).
LogProb configuration_log_prob(const PartitionStat& rho, Psi psi);

// Closed form: count / (psi + total) for a seen species, psi / (psi + total)
// for a new one.
LogProb predictive_single_log(const SpeciesCounts& train, const Observation& species, Psi psi);

// Same quantity as a ratio of Ewens-formula evaluations: the formula at the
// updated statistic over the formula at the training statistic, with the
// arrangement-count terms that turn partition probabilities into sequence
// probabilities.
LogProb predictive_single_log_ratio(const SpeciesCounts& train, const Observation& species,
                                    Psi psi);

// Chain rule over predictive_single_log starting from an empty class.
LogProb sequence_log_prob(std::span<const SpeciesId> sequence, Psi psi);

}  // namespace pex
