#pragma once

#include <cmath>

namespace isinglab {

// Critical inverse temperature of the square-lattice Ising model,
// beta_c = ln(1+sqrt(2))/2, and the matching self-dual FK bond density
// p_sd = 1 - exp(-2 beta_c) = 2 - sqrt(2).
inline const double beta_critical = 0.5 * std::log(1.0 + std::sqrt(2.0));
inline const double p_self_dual = 2.0 - std::sqrt(2.0);

// q is fixed at 2 (FK-Ising) everywhere except the q=1 percolation sanity
// checks in the tests.
inline constexpr double fk_q = 2.0;

inline double beta_to_p(double beta) { return -std::expm1(-2.0 * beta); }

} // namespace isinglab
