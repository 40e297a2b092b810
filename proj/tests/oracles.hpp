#pragma once

// Brute-force oracles shared by the unit and acceptance suites. Everything
// here enumerates configurations directly and stays independent of the
// implementation paths it checks (transfer engine, samplers, couplings).

#include "isinglab/es_coupling.hpp"
#include "isinglab/fk.hpp"
#include "isinglab/glauber.hpp"
#include "isinglab/ising.hpp"
#include "isinglab/lattice.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oracles {

using namespace isinglab;

// Unnormalized FK weights over all bond masks, optionally filtered on A^xi.
inline std::vector<double> fk_weights_brute(const Lattice& lat, const WiringPartition& wiring, double p,
                                            double q, bool filter_A) {
    const int ne = static_cast<int>(lat.edges.size());
    if (ne > 24) throw std::invalid_argument("fk_weights_brute: too many edges");
    std::vector<double> w(std::size_t{1} << ne, 0.0);
    BondConfig omega = BondConfig::all_closed(lat);
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
        for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
        if (filter_A && !event_A(lat, omega, wiring)) continue;
        w[mask] = fk_weight(lat, omega, wiring, p, q);
    }
    return w;
}

// P(omega(query)=1 | fixed edges [, A^xi]) by enumeration. fixed: 0/1/2 as in
// the transfer engine.
inline double fk_conditional_brute(const Lattice& lat, const WiringPartition& wiring, double p, double q,
                                   bool filter_A, const std::vector<std::uint8_t>& fixed, int query) {
    const int ne = static_cast<int>(lat.edges.size());
    double num = 0.0, den = 0.0;
    BondConfig omega = BondConfig::all_closed(lat);
    for (std::size_t mask = 0; mask < (std::size_t{1} << ne); ++mask) {
        bool ok = true;
        for (int e = 0; e < ne && ok; ++e)
            if (fixed[e] != 2 && ((mask >> e) & 1u) != fixed[e]) ok = false;
        if (!ok) continue;
        for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
        if (filter_A && !event_A(lat, omega, wiring)) continue;
        double w = fk_weight(lat, omega, wiring, p, q);
        den += w;
        if ((mask >> query) & 1u) num += w;
    }
    if (den <= 0.0) throw std::runtime_error("fk_conditional_brute: empty conditioning event");
    return num / den;
}

// P(no open path joins set A to set B | [, A^xi]) by enumeration.
inline double fk_disconnect_brute(const Lattice& lat, const WiringPartition& wiring, double p, double q,
                                  bool filter_A, const std::vector<int>& set_a,
                                  const std::vector<int>& set_b) {
    const int ne = static_cast<int>(lat.edges.size());
    double num = 0.0, den = 0.0;
    BondConfig omega = BondConfig::all_closed(lat);
    WiringPartition no_wiring;
    for (std::size_t mask = 0; mask < (std::size_t{1} << ne); ++mask) {
        for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
        if (filter_A && !event_A(lat, omega, wiring)) continue;
        double w = fk_weight(lat, omega, wiring, p, q);
        den += w;
        ClusterStructure comp = count_clusters(lat, omega, no_wiring).second;
        bool joined = false;
        for (int a : set_a) {
            for (int b : set_b)
                if (comp.same_cluster(a, b)) {
                    joined = true;
                    break;
                }
            if (joined) break;
        }
        if (!joined) num += w;
    }
    return num / den;
}

// Exact pushforward of mu (spins) through the bond-opening kernel: the law of
// fk_from_ising(sigma) with sigma ~ gibbs_exact.
inline std::vector<double> es_ising_to_fk_brute(const Lattice& lat, const BoundaryCondition& bc,
                                                double beta) {
    const int ne = static_cast<int>(lat.edges.size());
    const int n = lat.n_interior;
    double p = 1.0 - std::exp(-2.0 * beta);
    ExactDistribution mu = gibbs_exact(lat, bc, beta);
    std::vector<double> out(std::size_t{1} << ne, 0.0);
    for (std::uint32_t sm = 0; sm < (std::uint32_t{1} << n); ++sm) {
        SpinConfig sigma = spins_from_mask(lat, sm);
        // Per-edge open probability given sigma.
        std::vector<double> popen(ne, 0.0);
        for (int e = 0; e < ne; ++e) {
            const Edge& ed = lat.edges[e];
            int sa = lat.is_interior(ed.a) ? sigma.s[ed.a] : bc.boundary_spin(lat, ed.a);
            int sb = lat.is_interior(ed.b) ? sigma.s[ed.b] : bc.boundary_spin(lat, ed.b);
            popen[e] = (sa == sb) ? p : 0.0;
        }
        for (std::size_t bm = 0; bm < out.size(); ++bm) {
            double w = mu.p[sm];
            for (int e = 0; e < ne && w > 0.0; ++e)
                w *= ((bm >> e) & 1u) ? popen[e] : (1.0 - popen[e]);
            out[bm] += w;
        }
    }
    return out;
}

// Exact pushforward of nu^xi( . | A^xi ) through the cluster-spin
// assignment: the law of sigma on the interior. With forced=true the P/M
// clusters receive +/- deterministically; otherwise every cluster (wired ones
// included) draws an i.i.d. uniform spin.
inline std::vector<double> es_fk_to_ising_brute(const Lattice& lat, const WiringPartition& wiring,
                                                double p, bool filter_A, bool forced = true) {
    const int ne = static_cast<int>(lat.edges.size());
    const int n = lat.n_interior;
    std::vector<double> w = fk_weights_brute(lat, wiring, p, 2.0, filter_A);
    double z = 0.0;
    for (double v : w) z += v;
    std::vector<double> out(std::size_t{1} << n, 0.0);
    BondConfig omega = BondConfig::all_closed(lat);
    bool has_p = forced && wiring.classes.size() > 0 && !wiring.classes[0].empty();
    bool has_m = forced && wiring.classes.size() > 1 && !wiring.classes[1].empty();
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
        if (w[mask] <= 0.0) continue;
        for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
        ClusterStructure cs = count_clusters(lat, omega, wiring).second;
        int plus_root = has_p ? cs.find(wiring.classes[0][0]) : -1;
        int minus_root = has_m ? cs.find(wiring.classes[1][0]) : -1;
        // Enumerate spin assignments of the free clusters restricted to the
        // interior sites.
        std::vector<int> roots;
        std::vector<int> root_of(n);
        for (int i = 0; i < n; ++i) {
            int rt = cs.find(i);
            root_of[i] = rt;
            if (rt != plus_root && rt != minus_root) {
                bool seen = false;
                for (int r : roots)
                    if (r == rt) seen = true;
                if (!seen) roots.push_back(rt);
            }
        }
        double share = w[mask] / z / std::pow(2.0, static_cast<double>(roots.size()));
        for (std::size_t am = 0; am < (std::size_t{1} << roots.size()); ++am) {
            std::uint32_t spin_mask = 0;
            for (int i = 0; i < n; ++i) {
                int rt = root_of[i];
                int s;
                if (rt == plus_root) s = 1;
                else if (rt == minus_root) s = -1;
                else {
                    int idx = 0;
                    for (std::size_t k = 0; k < roots.size(); ++k)
                        if (roots[k] == rt) idx = static_cast<int>(k);
                    s = ((am >> idx) & 1u) ? 1 : -1;
                }
                if (s > 0) spin_mask |= (1u << i);
            }
            out[spin_mask] += share;
        }
    }
    return out;
}

// Exact one-block conditional resample kernel K(sigma -> sigma') for a
// full-width row range, from gibbs_exact of the whole box.
inline Mat block_resample_kernel(const Lattice& lat, const BoundaryCondition& bc, double beta, int y1,
                                 int y2) {
    const int n = lat.n_interior;
    if (n > 12) throw std::invalid_argument("block_resample_kernel: too many sites");
    const int states = 1 << n;
    ExactDistribution mu = gibbs_exact(lat, bc, beta);
    std::uint32_t block_mask = 0;
    for (int y = y1; y <= y2; ++y)
        for (int x = 1; x <= lat.width; ++x) block_mask |= (1u << lat.interior_id(x, y));
    Mat k(states);
    for (int m = 0; m < states; ++m) {
        std::uint32_t outside = static_cast<std::uint32_t>(m) & ~block_mask;
        double z = 0.0;
        for (int m2 = 0; m2 < states; ++m2)
            if ((static_cast<std::uint32_t>(m2) & ~block_mask) == outside) z += mu.p[m2];
        for (int m2 = 0; m2 < states; ++m2)
            if ((static_cast<std::uint32_t>(m2) & ~block_mask) == outside) k(m, m2) = mu.p[m2] / z;
    }
    return k;
}

} // namespace oracles
