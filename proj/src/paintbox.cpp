// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/paintbox.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "pex/error.hpp"

namespace pex {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kTailCutoff = 1e-12;

void check_discrete(const std::vector<double>& p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      throw DomainError("paintbox probabilities must be finite and non-negative");
    }
    if (i > 0 && p[i] > p[i - 1]) throw DomainError("paintbox probabilities must be non-increasing");
    sum += p[i];
  }
  if (sum > 1.0 + kMassTolerance) throw DomainError("paintbox probabilities sum above 1");
}

// Index into `row` selected by u in [0, 1) scaled to the row total.
std::size_t pick(const std::vector<double>& row, double total, double u) {
  double target = u * total;
  for (std::size_t s = 0; s < row.size(); ++s) {
    if (target < row[s]) return s;
    target -= row[s];
  }
  // Only reachable through rounding at the very top of the range.
  for (std::size_t s = row.size(); s-- > 0;) {
    if (row[s] > 0.0) return s;
  }
  return 0;
}

}  // namespace

PaintboxSpec::PaintboxSpec(std::vector<double> p) : p0_(0.0), p_(std::move(p)) {
  check_discrete(p_);
  double sum = 0.0;
  for (double v : p_) sum += v;
  p0_ = std::max(0.0, 1.0 - sum);
}

PaintboxSpec::PaintboxSpec(double p0, std::vector<double> p) : p0_(p0), p_(std::move(p)) {
  check_discrete(p_);
  if (!(p0_ >= 0.0 && p0_ <= 1.0)) throw DomainError("continuous mass must lie in [0, 1]");
  double sum = p0_;
  for (double v : p_) sum += v;
  if (std::abs(sum - 1.0) > kMassTolerance) {
    throw DomainError(fmt::format("paintbox mass sums to {} instead of 1", sum));
  }
}

PaintboxSpec geometric_paintbox(double theta) {
  if (!(theta >= 0.0 && theta <= 0.5)) {
    throw DomainError(fmt::format("theta must lie in [0, 1/2], got {}", theta));
  }
  std::vector<double> p;
  double term = theta;
  // Mass of all terms after the last one kept: theta^(v+1) / (1 - theta).
  while (term / (1.0 - theta) >= kTailCutoff) {
    p.push_back(term);
    term *= theta;
  }
  return PaintboxSpec(1.0 - theta / (1.0 - theta), std::move(p));
}

PaintboxSampler::PaintboxSampler(PaintboxSpec spec, std::uint64_t seed, SpeciesId id_offset)
    : spec_(std::move(spec)), row_(transition_row(spec_)), rng_(seed), id_offset_(id_offset) {}

std::size_t PaintboxSampler::next_state() { return pick(row_, 1.0, uniform01(rng_)); }

SpeciesId PaintboxSampler::next() {
  const std::size_t state = next_state();
  if (state == 0) return id_offset_ + spec_.states() + fresh_++;
  return id_offset_ + state;
}

CrpSampler::CrpSampler(Psi psi, std::uint64_t seed, SpeciesId first_id)
    : psi_(psi.value()), rng_(seed), next_id_(first_id) {}

SpeciesId CrpSampler::next() {
  const double j = static_cast<double>(history_.size());
  const double u = uniform01(rng_) * (psi_ + j);
  SpeciesId out;
  if (u < j) {
    // Uniform over past draws picks species l with probability count_l / j.
    const auto idx = std::min(static_cast<std::size_t>(u), history_.size() - 1);
    out = history_[idx];
  } else {
    out = next_id_++;
  }
  history_.push_back(out);
  return out;
}

std::vector<SpeciesId> sample_paintbox(const PaintboxSpec& spec, std::size_t n,
                                       std::uint64_t seed) {
  PaintboxSampler sampler(spec, seed);
  std::vector<SpeciesId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

std::vector<SpeciesId> sample_crp(Psi psi, std::size_t n, std::uint64_t seed) {
  CrpSampler sampler(psi, seed);
  std::vector<SpeciesId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

std::vector<double> transition_row(const PaintboxSpec& spec) {
  std::vector<double> row;
  row.reserve(spec.states());
  row.push_back(spec.continuous_mass());
  row.insert(row.end(), spec.discrete().begin(), spec.discrete().end());
  long double total = 0;
  for (double v : row) total += v;
  for (double& v : row) v = static_cast<double>(v / total);
  return row;
}

StationaryDistribution stationary_distribution(const PaintboxSpec& spec) {
  StationaryDistribution out;
  out.pi.push_back(spec.continuous_mass());
  out.pi.insert(out.pi.end(), spec.discrete().begin(), spec.discrete().end());

  const std::vector<double> row = transition_row(spec);
  for (std::size_t j = 0; j < out.pi.size(); ++j) {
    long double flow = 0;
    for (double pi_i : out.pi) flow += static_cast<long double>(pi_i) * row[j];
    out.residual = std::max(out.residual, static_cast<double>(std::abs(flow - out.pi[j])));
  }
  return out;
}

MarkovDiagnostics run_chain_diagnostics(const PaintboxSpec& spec, std::uint64_t steps,
                                        std::uint64_t seed) {
  if (steps == 0) throw DomainError("diagnostics need at least one step");
  MarkovDiagnostics out;
  out.steps = steps;
  out.seed = seed;
  out.stationary = transition_row(spec);

  const std::size_t states = out.stationary.size();
  out.visits.assign(states, 0);
  out.returns.assign(states, 0);
  std::vector<bool> seen(states, false);

  Rng rng(seed);
  std::size_t state = pick(out.stationary, 1.0, uniform01(rng));
  seen[state] = true;
  for (std::uint64_t t = 0; t < steps; ++t) {
    state = pick(out.stationary, 1.0, uniform01(rng));
    ++out.visits[state];
    if (seen[state]) ++out.returns[state];
    seen[state] = true;
  }

  out.frequencies.resize(states);
  double tv = 0.0;
  out.frequent_states_visited = true;
  for (std::size_t s = 0; s < states; ++s) {
    out.frequencies[s] = static_cast<double>(out.visits[s]) / static_cast<double>(steps);
    tv += std::abs(out.frequencies[s] - out.stationary[s]);
    if (out.stationary[s] >= 10.0 / static_cast<double>(steps) && out.visits[s] == 0) {
      out.frequent_states_visited = false;
    }
  }
  out.total_variation = 0.5 * tv;
  return out;
}

}  // namespace pex
