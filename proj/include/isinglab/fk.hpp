#pragma once

#include "isinglab/ising.hpp"
#include "isinglab/lattice.hpp"
#include "isinglab/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace isinglab {

// Open/closed values over the lattice's edge set, in global edge order.
struct BondConfig {
    std::vector<std::uint8_t> open;

    static BondConfig all_closed(const Lattice& lat) {
        BondConfig b;
        b.open.assign(lat.edges.size(), 0);
        return b;
    }
    static BondConfig all_open(const Lattice& lat) {
        BondConfig b;
        b.open.assign(lat.edges.size(), 1);
        return b;
    }
    int open_count() const {
        int o = 0;
        for (auto v : open) o += v;
        return o;
    }
};

// Partition of (boundary) sites into wiring classes.
struct WiringPartition {
    std::vector<std::vector<int>> classes;

    static WiringPartition none() { return {}; }
    // All existing boundary sites wired together.
    static WiringPartition wired(const Lattice& lat);
};

// Union-find over all sites of the closed box, wiring classes pre-merged.
// Cluster representative is the smallest site index.
class ClusterStructure {
  public:
    ClusterStructure(const Lattice& lat, const WiringPartition& wiring);

    void add_edge(const Lattice& lat, int edge) { unite(lat.edges[edge].a, lat.edges[edge].b); }
    void unite(int a, int b);
    int find(int site) const;
    int representative(int site) const { return rep_[find(site)]; }
    bool same_cluster(int a, int b) const { return find(a) == find(b); }
    int cluster_count() const { return count_; }

  private:
    mutable std::vector<int> parent_;
    std::vector<int> rep_;
    int count_ = 0;
};

std::pair<int, ClusterStructure> count_clusters(const Lattice& lat, const BondConfig& omega,
                                                const WiringPartition& wiring);

// Unnormalized FK weight p^o (1-p)^c q^k with k counted through the wiring.
double fk_weight(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring, double p,
                 double q);

// Exact FK distribution over all 2^E bond configurations (E <= 24), indexed
// by bond mask.
ExactDistribution fk_exact(const Lattice& lat, const WiringPartition& wiring, double p, double q = 2.0);

// Heat-bath conditional for a single bond at q=2: p when the endpoints are
// connected in omega minus the edge (through wiring), else p/(p+2(1-p)).
double bond_conditional_prob(const Lattice& lat, const BondConfig& omega, int edge,
                             const WiringPartition& wiring, double p);

// Single-bond heat-bath dynamics with the connectivity query answered by a
// bidirectional search on the open subgraph. One sweep resamples every edge
// once in index order; randomness is addressed by (edge, sweep_index) so runs
// replay deterministically.
class FkSampler {
  public:
    FkSampler(const Lattice& lat, const WiringPartition& wiring, double p);

    void sweep(BondConfig& omega, const RandomSource& rng, std::uint64_t sweep_index);
    bool connected_without(const BondConfig& omega, int edge);
    const Lattice& lattice() const { return *lat_; }
    double p() const { return p_; }

  private:
    const Lattice* lat_;
    double p_;
    double p_disconnected_;
    std::vector<int> wire_class_;               // -1 when unwired
    std::vector<std::vector<int>> class_sites_;
    // Scratch for the bidirectional search.
    std::vector<std::uint32_t> stamp_[2];
    std::vector<std::uint32_t> class_stamp_[2];
    std::vector<int> queue_[2];
    std::uint32_t epoch_ = 0;
};

// Induced wiring on the unexposed subgraph: sites joined through exposed open
// edges or the original wiring end up in one class (Domain Markov property).
WiringPartition domain_markov_restrict(const Lattice& lat, const std::vector<int>& exposed_edges,
                                       const std::vector<std::uint8_t>& exposed_values,
                                       const WiringPartition& wiring);

// Text dump, one line per class: `class-id:site,site,...`.
std::string wiring_dump(const WiringPartition& wiring);

} // namespace isinglab
