#pragma once

#include "isinglab/fk.hpp"
#include "isinglab/fk_engine.hpp"
#include "isinglab/ising.hpp"
#include "isinglab/rng.hpp"

#include <memory>
#include <optional>

namespace isinglab {

// FK wiring induced by an Ising boundary condition: all plus sites in one
// class, all minus sites in another (class order: P then M; empty classes are
// dropped). Periodic sides carry no wiring; their identification is realized
// by the wrap edges themselves.
WiringPartition wiring_from_bc(const Lattice& lat, const BoundaryCondition& bc);

// Event A^xi: no open path connects the plus-wired and minus-wired boundary
// sites. Vacuously true when either class is empty.
bool event_A(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring);

// i.i.d. uniform spin per cluster; the spin of a cluster is addressed by its
// representative site so couplings sharing clusters share spins.
SpinConfig ising_from_fk(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring,
                         const RandomSource& rng, std::uint64_t epoch);

// Same, but the P-cluster gets +1 and the M-cluster -1: together with
// conditioning on A^xi this reconstructs mu^xi from the FK side.
SpinConfig ising_from_fk_forced(const Lattice& lat, const BondConfig& omega,
                                const WiringPartition& wiring, const RandomSource& rng,
                                std::uint64_t epoch);

// Edge open with probability p iff the endpoint spins agree (boundary spins
// from bc); disagreeing edges stay closed.
BondConfig fk_from_ising(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma,
                         double p, const RandomSource& rng, std::uint64_t epoch);

// Sampler for nu^xi( . | A^xi). Strategy ladder: exact table enumeration on
// small edge sets, exact sequential conditionals through the transfer engine
// when the lattice is narrow enough, otherwise rejection from equilibrated
// nu^xi sweeps. Rejection failure (acceptance below min_acceptance over the
// trial budget) throws.
struct ConditionedSamplerOptions {
    int table_max_edges = 20;
    int rejection_burn_in = 64;
    std::uint64_t rejection_trial_budget = 200000;
    double min_acceptance = 1e-4;
};

class ConditionedFkSampler {
  public:
    using Options = ConditionedSamplerOptions;

    ConditionedFkSampler(const Lattice& lat, const BoundaryCondition& bc, double p,
                         Options opt = Options{});

    BondConfig sample(const RandomSource& rng, std::uint64_t epoch);
    const WiringPartition& wiring() const { return wiring_; }
    bool conditioning_active() const { return conditioned_; }
    const char* strategy() const { return strategy_; }

  private:
    const Lattice* lat_;
    WiringPartition wiring_;
    double p_;
    bool conditioned_ = false;
    Options opt_;
    const char* strategy_ = "";
    // exact table route
    std::vector<double> cdf_;
    // engine route
    std::unique_ptr<FkTransferEngine> engine_;
    // rejection route
    std::unique_ptr<FkSampler> rejection_sampler_;
    std::optional<BondConfig> rejection_state_;
    std::uint64_t rejection_sweeps_done_ = 0;
    std::uint64_t rejection_accepts_ = 0;
};

// sigma ~ mu^xi via the conditioned FK measure and forced cluster spins.
SpinConfig sample_ising_bc(const Lattice& lat, const BoundaryCondition& bc,
                           ConditionedFkSampler& sampler, const RandomSource& rng, std::uint64_t epoch);

} // namespace isinglab
