#pragma once

#include "isinglab/glauber.hpp"
#include "isinglab/ising.hpp"
#include "isinglab/rng.hpp"

#include <cstdint>
#include <vector>

namespace isinglab {

struct CftpResult {
    SpinConfig sample;
    double sweeps_to_coalesce = 0.0; // length of the successful epoch, in sweeps
    std::uint64_t updates = 0;       // per-chain site updates over both chains
    int epochs = 0;
    bool order_ok = true; // sandwich audit: top >= bottom at every recorded step
};

struct CftpOptions {
    std::uint64_t update_budget = std::uint64_t{1} << 30;
    bool audit_order = true;
};

// Monotone coupling-from-the-past for heat-bath Glauber: sandwich chains from
// the all-plus and all-minus states, systematic sweeps, randomness addressed
// by (site, absolute time) so longer epochs replay shorter ones bit for bit.
// The sample has law exactly mu^bc. Only the heat-bath family is monotone
// under this shared-variable coupling; metropolis is rejected.
CftpResult cftp_sample(const Lattice& lat, const BoundaryCondition& bc, double beta,
                       const RandomSource& rng, RateKind kind = RateKind::heat_bath,
                       const CftpOptions& opt = CftpOptions{});

// t_mix upper bound of Cor: gap^-1 * log(e / mu_min).
double mixing_time_bound(double gap, double mu_min);

} // namespace isinglab
