// Apache License, Version 2.0, refer to LICENSE.txt

// Extended-precision pieces of the Ewens sampling formula shared by the
// classifiers. log p(rho) = coefficient(n) + sufficient(rho).

#pragma once

#include <cstdint>

#include "pex/esf.hpp"

namespace pex::detail {

using Extended = long double;

Extended log_rising(double psi, std::uint64_t n);

// log n! - log psi^(n)
Extended esf_coefficient(std::uint64_t n, double psi);

// sum_t rho_t (log psi - log t) - log rho_t!
Extended esf_sufficient(const PartitionStat& rho, double psi);

// log n! - sum_t rho_t log t! - sum_t log rho_t!
Extended arrangements(const PartitionStat& rho);

inline Extended esf(const PartitionStat& rho, double psi) {
  return esf_coefficient(rho.n(), psi) + esf_sufficient(rho, psi);
}

inline Extended configuration(const PartitionStat& rho, double psi) {
  return esf(rho, psi) - arrangements(rho);
}

}  // namespace pex::detail
