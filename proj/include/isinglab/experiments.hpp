#pragma once

#include "isinglab/glauber.hpp"
#include "isinglab/ising.hpp"
#include "isinglab/lattice.hpp"
#include "isinglab/linalg.hpp"
#include "isinglab/rng.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace isinglab {

struct ScalingPoint {
    double n = 0.0;
    double value = 0.0;
    double se = 0.0;
};

// Weighted least squares on (log n, log value); sigma_log = se/value.
struct ScalingFit {
    std::vector<ScalingPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};
ScalingFit fit_loglog(const std::vector<ScalingPoint>& points);

struct VarianceScalingRow {
    int n = 0;
    long samples = 0;
    double var_f = 0.0;        // Var(f), f = magnetization over Lambda*
    double var_se = 0.0;
    double dirichlet = 0.0;    // E(f) estimate
    double dirichlet_se = 0.0;
    double mean_f = 0.0;       // should vanish: E sigma(x) = 0 check
    double mean_f_se = 0.0;
    double max_dirichlet_sample = 0.0; // per-configuration Lipschitz bound check
    int lambda_star_lo = 0, lambda_star_hi = 0;
};

struct VarianceScalingResult {
    std::vector<VarianceScalingRow> rows;
    ScalingFit var_fit;   // slope target 15/4
    ScalingFit ratio_fit; // Var/E slope, target 7/4
};

// Sampling route: FK heat-bath sweeps + Edwards-Sokal spin assignment at
// criticality; Var(f) uses the exact conditional identity
// Var(f) = E[sum_C |C cap Lambda*|^2] (valid when no cluster carries a forced
// spin, e.g. free boundary).
VarianceScalingResult variance_scaling(const std::vector<int>& n_list, const std::string& bc_spec,
                                       long samples, const RandomSource& rng, double beta);

struct AutocorrResult {
    double exponent = 0.0; // decay power of E[sigma_0(0) sigma_t(0)]
    double se = 0.0;
    bool power_law_preferred = false; // false when exponential decay fits better
    std::vector<double> lag_sweeps;
    std::vector<double> corr;
};

// Spin autocorrelation on the n x n torus, random-scan heat-bath chain.
AutocorrResult autocorr_exponent(int n, long sweeps, const RandomSource& rng, double beta);

struct CoalescenceRow {
    int n = 0;
    long reps = 0;
    double mean_sweeps = 0.0;
    double se = 0.0;
    double mean_updates = 0.0;
};
struct CoalescenceResult {
    std::vector<CoalescenceRow> rows;
    ScalingFit fit;
};
CoalescenceResult coalescence_scaling(const std::vector<int>& n_list, const std::string& bc_spec,
                                      long reps, double beta, const RandomSource& rng);

// Flip the spins at all odd-parity sites, boundary included; an involution
// that transports the Gibbs measure at beta to the one at -beta.
std::pair<SpinConfig, BoundaryCondition> antiferro_map(const Lattice& lat, const BoundaryCondition& bc,
                                                       const SpinConfig& sigma);

// Lambda* = [ceil(n/4), floor(3n/4)]^2.
std::pair<int, int> lambda_star_range(int n);

// --- configuration and output plumbing ---

struct ExperimentConfig {
    std::string experiment;
    int r = 0, r_prime = 0;
    std::string bc_spec = "free";
    double beta;
    std::uint64_t seed = 1;
    long samples = 1000;
    long burn_in = 0; // 0 = per-experiment default
    std::string out = "";
    std::map<std::string, std::string> extras;
};

// Flat `key = value` text; unknown keys are errors.
ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> parse_kv_file(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);
void write_manifest(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv);

// Parallel chain fan-out capped by ISING_LAB_THREADS; results are aggregated
// in task order, so output is independent of the thread count.
int thread_cap();
void parallel_chains(long n_tasks, const std::function<void(long)>& fn);

} // namespace isinglab
