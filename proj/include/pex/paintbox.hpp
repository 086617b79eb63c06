// Apache License, Version 2.0, refer to LICENSE.txt

// Paintbox processes, the Chinese restaurant sampler, and occupancy
// diagnostics of the paintbox viewed as a Markov chain.
//
// A paintbox draws the continuous interval with probability p0, emitting a
// species never seen before, or discrete state v with probability p_v,
// emitting the stable id of v. As a chain every row of the transition matrix
// equals pi = (p0, p_1, p_2, ...), state 0 being the continuous interval.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pex/esf.hpp"
#include "pex/random.hpp"

namespace pex {

class PaintboxSpec {
 public:
  // p0 = 1 - sum(p). p must be non-increasing, non-negative, sum <= 1.
  explicit PaintboxSpec(std::vector<double> p);
  // p0 given explicitly; p0 + sum(p) must equal 1 within 1e-12.
  PaintboxSpec(double p0, std::vector<double> p);

  double continuous_mass() const noexcept { return p0_; }
  const std::vector<double>& discrete() const noexcept { return p_; }
  // Continuous state plus discrete states.
  std::size_t states() const noexcept { return p_.size() + 1; }

 private:
  double p0_;
  std::vector<double> p_;
};

// p_v = theta^v, truncated once the remaining tail is below 1e-12;
// p0 = 1 - theta / (1 - theta). theta must lie in [0, 1/2].
PaintboxSpec geometric_paintbox(double theta);

// Discrete state v emits `id_offset + v`; continuous visits emit fresh ids
// `id_offset + states() + j` for j = 0, 1, ...
class PaintboxSampler {
 public:
  PaintboxSampler(PaintboxSpec spec, std::uint64_t seed, SpeciesId id_offset = 0);

  SpeciesId next();
  // 0 for the continuous interval, v for discrete state v.
  std::size_t next_state();

 private:
  PaintboxSpec spec_;
  std::vector<double> row_;
  Rng rng_;
  SpeciesId id_offset_;
  SpeciesId fresh_ = 0;
};

// Sequential Ewens generator: after j draws the next one repeats species l
// with probability count_l / (psi + j) or opens a new species with
// probability psi / (psi + j). New species get ids first_id, first_id+1, ...
class CrpSampler {
 public:
  CrpSampler(Psi psi, std::uint64_t seed, SpeciesId first_id = 1);

  SpeciesId next();
  std::size_t drawn() const noexcept { return history_.size(); }

 private:
  double psi_;
  Rng rng_;
  SpeciesId next_id_;
  std::vector<SpeciesId> history_;
};

std::vector<SpeciesId> sample_paintbox(const PaintboxSpec& spec, std::size_t n,
                                       std::uint64_t seed);

std::vector<SpeciesId> sample_crp(Psi psi, std::size_t n, std::uint64_t seed);

struct StationaryDistribution {
  std::vector<double> pi;  // (p0, p_1, p_2, ...)
  // max_j |(pi P)_j - pi_j|
  double residual = 0.0;
};

// Row of the transition matrix over the retained states, renormalized so
// that the truncated chain is stochastic.
std::vector<double> transition_row(const PaintboxSpec& spec);

StationaryDistribution stationary_distribution(const PaintboxSpec& spec);

struct MarkovDiagnostics {
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::vector<double> stationary;
  std::vector<double> frequencies;
  std::vector<std::uint64_t> visits;
  // Visits to a state that had been occupied earlier in the run.
  std::vector<std::uint64_t> returns;
  double total_variation = 0.0;
  // Every state with stationary mass >= 10 / steps was visited.
  bool frequent_states_visited = false;
};

MarkovDiagnostics run_chain_diagnostics(const PaintboxSpec& spec, std::uint64_t steps,
                                        std::uint64_t seed);

}  // namespace pex
