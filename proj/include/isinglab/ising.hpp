#pragma once

#include "isinglab/lattice.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace isinglab {

// Spins over the interior sites, values in {-1,+1}. Boundary values live in
// the BoundaryCondition.
struct SpinConfig {
    std::vector<std::int8_t> s;

    static SpinConfig constant(const Lattice& lat, std::int8_t v) {
        SpinConfig c;
        c.s.assign(lat.n_interior, v);
        return c;
    }
};

// Probabilities indexed by configuration mask (bit i set <=> site i has +1,
// or edge i open for bond distributions).
struct ExactDistribution {
    std::vector<double> p;
};

// Pack/unpack against the mask convention above.
std::uint32_t mask_of(const SpinConfig& c);
SpinConfig spins_from_mask(const Lattice& lat, std::uint32_t mask);

// Sum of sigma(u)sigma(v) over all interacting pairs, boundary spins fixed by
// bc; free directions contribute nothing.
int interaction_sum(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma);

int magnetization(const SpinConfig& sigma);

// Exact Gibbs distribution mu(sigma) ~ exp(beta * interaction_sum), by full
// enumeration. Requires |interior| <= 24.
ExactDistribution gibbs_exact(const Lattice& lat, const BoundaryCondition& bc, double beta);

double tv_distance(const ExactDistribution& a, const ExactDistribution& b);

// Snapshot format: height lines of width characters from {+,-}, top row first.
std::string to_snapshot(const Lattice& lat, const SpinConfig& sigma);
SpinConfig from_snapshot(const Lattice& lat, const std::string& text);

// Exact joint marginal of the spins on rows y_from..height, computed with a
// row transfer matrix (open boxes only; horizontal wrap allowed). Entry index
// packs those rows row-major, lowest row first. Usable when
// width*(height-y_from+1) <= 24 and width <= 16.
std::vector<double> row_marginal_exact(const Lattice& lat, const BoundaryCondition& bc, double beta,
                                       int y_from);

} // namespace isinglab
