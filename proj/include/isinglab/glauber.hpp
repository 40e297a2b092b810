#pragma once

#include "isinglab/ising.hpp"
#include "isinglab/linalg.hpp"
#include "isinglab/rng.hpp"

#include <string>
#include <vector>

namespace isinglab {

enum class RateKind { heat_bath, metropolis };

// Single-site flip rates. Both families satisfy the reversible detailed
// balance c(x,sigma)/c(x,sigma^x) = exp(-2 beta sigma(x) S) with
// S = sum of neighbor spins, and are bounded in (0,1]. Rates are tabulated
// over (sign, S in [-4,4]) for the inner loops.
struct RateFamily {
    RateKind kind = RateKind::heat_bath;
    double beta = 0.0;
    double table[2][9] = {};

    static RateFamily make(RateKind kind, double beta);
    static RateFamily heat_bath(double beta) { return make(RateKind::heat_bath, beta); }
    static RateFamily metropolis(double beta) { return make(RateKind::metropolis, beta); }

    double rate(int spin, int neighbor_sum) const { return table[spin > 0 ? 1 : 0][neighbor_sum + 4]; }
};

struct ChainState {
    SpinConfig sigma;
    double sweeps = 0.0; // 1 sweep = |interior| update attempts
};

int neighbor_sum(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma, int site);
double flip_rate(const RateFamily& fam, const Lattice& lat, const BoundaryCondition& bc,
                 const SpinConfig& sigma, int site);

// One uniform-site update attempt; advances sweeps by 1/|interior|.
void random_scan_step(ChainState& state, const RateFamily& fam, const Lattice& lat,
                      const BoundaryCondition& bc, RandomSource& rng);

// Dense generator L over the 2^N configuration space (N <= 12):
// L[m][m^x] = c(x, m), diagonal = -row sum.
Mat generator_matrix(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam);

// Left null vector of L normalized to sum 1, by linear solve (independent of
// the Gibbs enumeration).
std::vector<double> stationary_vector(const Mat& generator);

// Spectral gap = second-smallest eigenvalue of -L, via the mu-symmetrized
// generator.
double exact_generator_gap(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam);

// E(f) = 1/2 sum_{sigma,x} mu(sigma) c(x,sigma) [f(sigma^x)-f(sigma)]^2.
double dirichlet_form(const std::vector<double>& f, const ExactDistribution& mu,
                      const RateFamily& fam, const Lattice& lat, const BoundaryCondition& bc);

double variance_under(const std::vector<double>& f, const ExactDistribution& mu);

// Infimum of E(f)/Var(f) over the span of the full indicator basis, solved as
// a generalized eigenproblem assembled directly from the Dirichlet form;
// cross-checks exact_generator_gap.
double dirichlet_gap_infimum(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam,
                             const ExactDistribution& mu);

// Worst-case total-variation distance to stationarity of the continuous-time
// chain at time t, and the first t (grid resolution dt) where it drops to
// 1/e.
double worst_case_tv(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam, double t);
double exact_tmix(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam,
                  double dt = 0.05, double t_max = 1e4);

struct DecayFit {
    double rate = 0.0; // decay exponent (per unit time)
    double se = 0.0;
    int points = 0;
};

// Exponential-decay fit to the autocorrelation of a stationary series sampled
// every dt sweeps; estimates the slowest rate lambda (>= gap). Throws when the
// autocorrelation does not decay (constant series, degenerate window).
DecayFit autocorr_gap_estimate(const std::vector<double>& series, double dt);

// Power-law fit |corr| ~ t^-a over a lag window; returns a and its se.
DecayFit autocorr_power_fit(const std::vector<double>& corr, const std::vector<double>& times);

// Normalized autocorrelation function of a series up to max_lag.
std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag);

} // namespace isinglab
