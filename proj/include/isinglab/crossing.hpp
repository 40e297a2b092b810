#pragma once

#include "isinglab/fk.hpp"
#include "isinglab/lattice.hpp"
#include "isinglab/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace isinglab {

// Inclusive interior sub-rectangle.
struct SubRect {
    int x1 = 1, y1 = 1, x2 = 1, y2 = 1;
};

// Open path between the top and bottom rows of R using only edges inside R;
// boundary wiring is ignored (the crossing event is about open paths in R).
bool vertical_crossing(const Lattice& lat, const BondConfig& omega, const SubRect& r);

// No open path from any site of `inner` to any boundary site (the primal
// statement of a surrounding dual circuit).
bool dual_disconnect(const Lattice& lat, const BondConfig& omega, const SubRect& inner);

// Cluster connectivity (through wiring), matching the spin-correlation
// semantics of the Edwards-Sokal coupling.
bool cluster_connected(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring,
                       int site_a, int site_b);

struct CrossingReport {
    int r = 0, r_prime = 0;
    double rho = 0.0;
    std::string bc;
    double p = 0.0;
    long samples = 0;
    double estimate = 0.0;
    double std_error = 0.0; // sqrt(est(1-est)/samples)
    int burn_in_used = 0;
};

struct EstimateOptions {
    int stride_sweeps = 2;
    int initial_burn_in = 200;
    int max_burn_in_doublings = 6;
};

// Monte Carlo estimate of a boolean observable of the equilibrated FK
// configuration. Burn-in starts at initial_burn_in sweeps and doubles until
// the two half-run estimates agree within two combined standard errors.
template <class Observable>
CrossingReport estimate_fk_event(const Lattice& lat, const WiringPartition& wiring, double p,
                                 long samples, const RandomSource& rng, Observable&& obs,
                                 const EstimateOptions& opt = EstimateOptions{}) {
    if (samples < 4) throw std::invalid_argument("estimate_fk_event: too few samples");
    FkSampler sampler(lat, wiring, p);
    BondConfig omega = BondConfig::all_open(lat);
    std::uint64_t sweep_index = 0;
    int burn = opt.initial_burn_in;

    long hits = 0;
    for (int attempt = 0;; ++attempt) {
        for (int b = 0; b < burn; ++b) sampler.sweep(omega, rng, sweep_index++);
        hits = 0;
        long half = samples / 2;
        long hits_first = 0;
        for (long s = 0; s < samples; ++s) {
            for (int k = 0; k < opt.stride_sweeps; ++k) sampler.sweep(omega, rng, sweep_index++);
            bool v = obs(omega);
            hits += v;
            if (s < half) hits_first += v;
        }
        double p1 = static_cast<double>(hits_first) / half;
        double p2 = static_cast<double>(hits - hits_first) / (samples - half);
        double se = std::sqrt(p1 * (1 - p1) / half + p2 * (1 - p2) / (samples - half)) + 1e-12;
        if (std::fabs(p1 - p2) <= 2.0 * se || attempt >= opt.max_burn_in_doublings) {
            CrossingReport rep;
            rep.r = lat.width;
            rep.r_prime = lat.height;
            rep.p = p;
            rep.samples = samples;
            rep.estimate = static_cast<double>(hits) / samples;
            rep.std_error = std::sqrt(rep.estimate * (1.0 - rep.estimate) / samples);
            rep.burn_in_used = burn;
            return rep;
        }
        burn *= 2;
    }
}

CrossingReport estimate_crossing(int r, int r_prime, const std::string& bc_spec, double p, long samples,
                                 const RandomSource& rng, const EstimateOptions& opt = EstimateOptions{});

// One report per rho: crossing of the strip of width r and height rho*r under
// the given boundary condition.
std::vector<CrossingReport> strip_decay_profile(int r, const std::vector<double>& rho_list,
                                                const std::string& bc_spec, double p, long samples,
                                                const RandomSource& rng,
                                                const EstimateOptions& opt = EstimateOptions{});

// Connection probability of two interior sites.
CrossingReport two_point_connectivity(int r, int r_prime, const std::string& bc_spec, double p,
                                      Coord a, Coord b, long samples, const RandomSource& rng,
                                      const EstimateOptions& opt = EstimateOptions{});

} // namespace isinglab
