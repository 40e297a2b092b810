#pragma once

#include "isinglab/ising.hpp"
#include "isinglab/lattice.hpp"
#include "isinglab/rng.hpp"

#include <utility>

namespace isinglab {

// Two vertically overlapping blocks: Lambda_1 = rows [lo1, r'] and
// Lambda_2 = rows [1, hi2], full width. The upper block's lower edge is
// rounded up and the lower block's upper edge down, which keeps the union
// equal to the whole box and the overlaps of distinct shifts disjoint away
// from exact-integer boundaries.
struct BlockPair {
    int lo1 = 1;
    int hi2 = 1;
    int ell = 1;
    int overlap_lo() const { return lo1; }
    int overlap_hi() const { return hi2; }
};

BlockPair make_blocks(int r, int r_prime, int ell);

// Resample the spins of a full-width row range [y1,y2] from their exact
// conditional Gibbs law given the rest (monotone CFTP on the sub-box with the
// induced boundary). Spins outside the block are unchanged. The same
// (rng, epoch) pair reproduces the same conditional update map, which is what
// the shared-randomness block coupling needs.
void block_update(const Lattice& lat, const BoundaryCondition& bc, double beta, SpinConfig& sigma,
                  int y1, int y2, const RandomSource& rng, std::uint64_t epoch);

// Probability that chains started from all-plus and all-minus coalesce after
// the Lambda_1-then-Lambda_2 update pair under shared randomness.
struct BlockCouplingEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    long samples = 0;
};
BlockCouplingEstimate block_coupling_probability(const Lattice& lat, const BoundaryCondition& bc,
                                                 double beta, int ell, long samples,
                                                 const RandomSource& rng);

// Explicit exponent from the limiting crossing probability:
// C = 2 log_{3/2}( 2 / (1 - p_plus) ).
double exponent_from_crossing(double p_plus);

} // namespace isinglab
