#pragma once

#include "isinglab/es_coupling.hpp"
#include "isinglab/fk.hpp"
#include "isinglab/fk_engine.hpp"
#include "isinglab/ising.hpp"
#include "isinglab/rng.hpp"

#include <array>
#include <memory>
#include <unordered_map>
#include <vector>

namespace isinglab {

// State of one exposure run: the revealed cluster of the seed boundary and
// the exposure order.
struct ExposureState {
    std::vector<std::uint8_t> in_xi;  // per site
    std::vector<int> exposed;         // edge ids in exposure order
    int T = -1;                       // edges revealed in the growth phase
    int max_height = 0;               // largest y coordinate reached by Xi
    int min_height_from_top = 0;      // two-sided runs: smallest y reached by Xi'
    std::vector<std::uint8_t> in_xi_top; // two-sided runs: top cluster
};

struct GrandCoupling {
    BondConfig omega_wired; // omega^1
    BondConfig omega_xi;    // ~ nu^xi( . | A^xi)
    BondConfig omega_eta;   // ~ nu^eta( . | A^eta)
    ExposureState exposure;
    bool conditioned_legs = false; // false => only omega_wired is meaningful
};

// Drives the grand coupling: reveals the cluster of the bottom boundary in
// omega^1 ~ nu^1 while constructing omega^xi, omega^eta from the same unit
// variables U_e; conditionals are exact through the transfer engine and
// cached across runs (the exposure tree shares prefixes heavily).
struct ExposureOptions {
    bool two_sided = false;       // also grow from the top boundary
    bool want_conditioned = true; // build the xi/eta legs when feasible
    double p = -1.0;              // bond density; negative = self-dual point
    int cache_max_depth = 26;
    std::size_t cache_max_entries = 6'000'000;
};

class ExposureRunner {
  public:
    using Options = ExposureOptions;

    ExposureRunner(const Lattice& lat, const BoundaryCondition& xi, const BoundaryCondition& eta,
                   Options opt = Options{});

    GrandCoupling run(const RandomSource& rng, std::uint64_t run_index);

    bool conditioned_legs_enabled() const { return legs_enabled_; }
    const Lattice& lattice() const { return *lat_; }
    const WiringPartition& wiring_xi() const { return wiring_xi_; }
    const WiringPartition& wiring_eta() const { return wiring_eta_; }
    std::size_t cache_size() const;

  private:
    struct NodeKey {
        std::array<std::uint64_t, 3> w{};
        bool operator==(const NodeKey&) const = default;
    };
    struct NodeKeyHash {
        std::size_t operator()(const NodeKey& k) const;
    };
    struct Leg {
        std::unique_ptr<FkTransferEngine> engine;
        std::unordered_map<NodeKey, double, NodeKeyHash> cache;
        int alias_of = -1; // leg index whose thresholds coincide
    };

    double leg_conditional(int leg, const std::vector<std::uint8_t>& fixed, int depth, int edge);

    const Lattice* lat_;
    WiringPartition wiring_xi_, wiring_eta_;
    Options opt_;
    bool legs_enabled_ = false;
    std::array<Leg, 3> legs_; // 0 = wired, 1 = xi, 2 = eta
    std::vector<int> seed_sites_;
    std::vector<int> seed_sites_top_;
};

// Claim of the coupling: the conditioned legs never open an edge the wired
// configuration keeps closed.
bool check_domination(const GrandCoupling& gc);

// Every edge between Xi and its complement is closed in omega^1 (hence in the
// conditioned legs).
bool check_closed_interface(const Lattice& lat, const GrandCoupling& gc);

// Xi stays strictly below height rho*r.
bool xi_confined(const Lattice& lat, const GrandCoupling& gc, double rho);

// Assign spins to both conditioned legs with shared cluster-spin variables;
// sigma^xi and sigma^eta agree on every component of Xi^c.
std::pair<SpinConfig, SpinConfig> couple_remainder(const Lattice& lat, const GrandCoupling& gc,
                                                   const WiringPartition& wxi,
                                                   const WiringPartition& weta, const RandomSource& rng,
                                                   std::uint64_t run_index);

struct SpatialMixingResult {
    double tv = 0.0;            // exact TV between the top-region spin marginals
    double confined_prob = 0.0; // exact P(Xi confined below rho*r) under nu^1
    double coupling_bound = 0.0; // 1 - confined_prob
};

// Exact evaluation of the spatial-mixing statement on an enumerable box:
// xi and eta differ only on the bottom boundary; the compared region is rows
// >= ceil(rho*r).
SpatialMixingResult spatial_mixing_tv_exact(int r, int r_prime, double rho, const std::string& xi_spec,
                                            const std::string& eta_spec, double beta);

} // namespace isinglab
