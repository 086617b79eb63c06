// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/esf.hpp"

#include <cmath>
#include <fmt/format.h>

#include "esf_terms.hpp"
#include "pex/error.hpp"

namespace pex {

namespace {

// Rising factorials below this length are summed term by term.
constexpr std::uint64_t kExactRisingLimit = 64;

}  // namespace

Psi::Psi(double value) : value_(value) {
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw DomainError(fmt::format("psi must be finite and positive, got {}", value));
  }
}

SpeciesCounts::SpeciesCounts(std::initializer_list<Map::value_type> init) {
  for (const auto& [species, count] : init) {
    if (count == 0) throw DomainError("species counts must be positive");
    add(species, count);
  }
}

SpeciesCounts SpeciesCounts::from_observations(std::span<const SpeciesId> sequence) {
  SpeciesCounts out;
  for (SpeciesId s : sequence) out.add(s);
  return out;
}

void SpeciesCounts::add(SpeciesId species, std::uint64_t times) {
  if (times == 0) return;
  counts_[species] += times;
  total_ += times;
}

std::uint64_t SpeciesCounts::count(SpeciesId species) const noexcept {
  auto it = counts_.find(species);
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t SpeciesCounts::count(const Observation& species) const noexcept {
  if (const auto* id = std::get_if<SpeciesId>(&species)) return count(*id);
  return 0;
}

PartitionStat::PartitionStat(const Map& freq_of_freq) {
  for (const auto& [t, r] : freq_of_freq) {
    if (t == 0) throw DomainError("partition multiplicities start at 1");
    if (r == 0) continue;
    rho_.emplace(t, r);
    n_ += t * r;
  }
}

PartitionStat::PartitionStat(std::initializer_list<Map::value_type> init)
    : PartitionStat(Map(init)) {}

std::uint64_t PartitionStat::rho(std::uint64_t t) const noexcept {
  auto it = rho_.find(t);
  return it == rho_.end() ? 0 : it->second;
}

std::uint64_t PartitionStat::distinct() const noexcept {
  std::uint64_t k = 0;
  for (const auto& [t, r] : rho_) k += r;
  return k;
}

void PartitionStat::increment(std::uint64_t from) { increase(from, 1); }

void PartitionStat::increase(std::uint64_t from, std::uint64_t by) {
  if (by == 0) return;
  if (from > 0) {
    auto it = rho_.find(from);
    if (it == rho_.end()) {
      throw DomainError(fmt::format("no species with multiplicity {}", from));
    }
    if (--it->second == 0) rho_.erase(it);
  }
  ++rho_[from + by];
  n_ += by;
}

std::string PartitionStat::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [t, r] : rho_) {
    if (!first) out += ", ";
    out += fmt::format("{}:{}", t, r);
    first = false;
  }
  out += "}";
  return out;
}

PartitionStat partition_stat_from_counts(const SpeciesCounts& counts) {
  PartitionStat::Map rho;
  for (const auto& [species, c] : counts.entries()) ++rho[c];
  return PartitionStat(rho);
}

SpeciesCounts merge_counts(const SpeciesCounts& train, const SpeciesCounts& test) {
  SpeciesCounts out = train;
  for (const auto& [species, c] : test.entries()) out.add(species, c);
  return out;
}

PartitionStat update_stat_single(const SpeciesCounts& train, const Observation& species) {
  PartitionStat stat = partition_stat_from_counts(train);
  stat.increment(train.count(species));
  return stat;
}

namespace detail {

Extended log_rising(double psi, std::uint64_t n) {
  const Extended x = psi;
  if (n <= kExactRisingLimit) {
    Extended sum = 0;
    for (std::uint64_t i = 0; i < n; ++i) sum += std::log(x + static_cast<Extended>(i));
    return sum;
  }
  return std::lgamma(x + static_cast<Extended>(n)) - std::lgamma(x);
}

Extended esf_coefficient(std::uint64_t n, double psi) {
  return std::lgamma(static_cast<Extended>(n) + 1) - log_rising(psi, n);
}

Extended esf_sufficient(const PartitionStat& rho, double psi) {
  const Extended log_psi = std::log(static_cast<Extended>(psi));
  Extended sum = 0;
  for (const auto& [t, r] : rho.entries()) {
    const Extended rt = static_cast<Extended>(r);
    sum += rt * (log_psi - std::log(static_cast<Extended>(t))) - std::lgamma(rt + 1);
  }
  return sum;
}

Extended arrangements(const PartitionStat& rho) {
  Extended sum = std::lgamma(static_cast<Extended>(rho.n()) + 1);
  for (const auto& [t, r] : rho.entries()) {
    const Extended rt = static_cast<Extended>(r);
    sum -= rt * std::lgamma(static_cast<Extended>(t) + 1) + std::lgamma(rt + 1);
  }
  return sum;
}

}  // namespace detail

double log_rising_factorial(Psi psi, std::uint64_t n) {
  return static_cast<double>(detail::log_rising(psi.value(), n));
}

LogProb esf_log_prob(const PartitionStat& rho, Psi psi) {
  if (rho.n() == 0) return 0.0;
  return static_cast<double>(detail::esf(rho, psi.value()));
}

double log_arrangements(const PartitionStat& rho) {
  return static_cast<double>(detail::arrangements(rho));
}

LogProb configuration_log_prob(const PartitionStat& rho, Psi psi) {
  if (rho.n() == 0) return 0.0;
  return static_cast<double>(detail::configuration(rho, psi.value()));
}

LogProb predictive_single_log(const SpeciesCounts& train, const Observation& species, Psi psi) {
  const double denom = psi.value() + static_cast<double>(train.total());
  const std::uint64_t c = train.count(species);
  if (c == 0) {
    if (train.empty()) return 0.0;
    return std::log(psi.value()) - std::log(denom);
  }
  return std::log(static_cast<double>(c)) - std::log(denom);
}

LogProb predictive_single_log_ratio(const SpeciesCounts& train, const Observation& species,
                                    Psi psi) {
  const PartitionStat before = partition_stat_from_counts(train);
  const PartitionStat after = update_stat_single(train, species);
  return static_cast<double>(detail::configuration(after, psi.value()) -
                             detail::configuration(before, psi.value()));
}

LogProb sequence_log_prob(std::span<const SpeciesId> sequence, Psi psi) {
  SpeciesCounts seen;
  detail::Extended sum = 0;
  for (SpeciesId s : sequence) {
    sum += predictive_single_log(seen, s, psi);
    seen.add(s);
  }
  return static_cast<double>(sum);
}

}  // namespace pex
