#include "isinglab/es_coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

WiringPartition wiring_from_bc(const Lattice& lat, const BoundaryCondition& bc) {
    WiringPartition w;
    if (lat.n_sites == lat.n_interior) return w;
    // Class 0 is always P and class 1 always M; either may be empty.
    w.classes.assign(2, {});
    for (int s = lat.n_interior; s < lat.n_sites; ++s) {
        if (bc.boundary_spin(lat, s) > 0) w.classes[0].push_back(s);
        else w.classes[1].push_back(s);
    }
    return w;
}

bool event_A(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring) {
    if (wiring.classes.size() < 2 || wiring.classes[0].empty() || wiring.classes[1].empty()) return true;
    ClusterStructure cs = count_clusters(lat, omega, wiring).second;
    return !cs.same_cluster(wiring.classes[0][0], wiring.classes[1][0]);
}

SpinConfig ising_from_fk(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring,
                         const RandomSource& rng, std::uint64_t epoch) {
    ClusterStructure cs = count_clusters(lat, omega, wiring).second;
    SpinConfig sigma;
    sigma.s.resize(lat.n_interior);
    for (int i = 0; i < lat.n_interior; ++i) {
        int rep = cs.representative(i);
        sigma.s[i] = rng.u(Purpose::cluster_spin, static_cast<std::uint64_t>(rep), epoch) < 0.5 ? 1 : -1;
    }
    return sigma;
}

SpinConfig ising_from_fk_forced(const Lattice& lat, const BondConfig& omega,
                                const WiringPartition& wiring, const RandomSource& rng,
                                std::uint64_t epoch) {
    ClusterStructure cs = count_clusters(lat, omega, wiring).second;
    int plus_root = wiring.classes.size() > 0 && !wiring.classes[0].empty()
                        ? cs.find(wiring.classes[0][0])
                        : -1;
    int minus_root = wiring.classes.size() > 1 && !wiring.classes[1].empty()
                         ? cs.find(wiring.classes[1][0])
                         : -1;
    if (plus_root >= 0 && plus_root == minus_root)
        throw std::runtime_error("ising_from_fk_forced: configuration violates A^xi");
    SpinConfig sigma;
    sigma.s.resize(lat.n_interior);
    for (int i = 0; i < lat.n_interior; ++i) {
        int root = cs.find(i);
        if (root == plus_root) sigma.s[i] = 1;
        else if (root == minus_root) sigma.s[i] = -1;
        else {
            int rep = cs.representative(i);
            sigma.s[i] = rng.u(Purpose::cluster_spin, static_cast<std::uint64_t>(rep), epoch) < 0.5 ? 1 : -1;
        }
    }
    return sigma;
}

BondConfig fk_from_ising(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma,
                         double p, const RandomSource& rng, std::uint64_t epoch) {
    BondConfig omega = BondConfig::all_closed(lat);
    for (int e = 0; e < static_cast<int>(lat.edges.size()); ++e) {
        const Edge& ed = lat.edges[e];
        int sa = lat.is_interior(ed.a) ? sigma.s[ed.a] : bc.boundary_spin(lat, ed.a);
        int sb = lat.is_interior(ed.b) ? sigma.s[ed.b] : bc.boundary_spin(lat, ed.b);
        if (sa == sb && rng.u(Purpose::es_bond, static_cast<std::uint64_t>(e), epoch) < p)
            omega.open[e] = 1;
    }
    return omega;
}

ConditionedFkSampler::ConditionedFkSampler(const Lattice& lat, const BoundaryCondition& bc, double p,
                                           Options opt)
    : lat_(&lat), wiring_(wiring_from_bc(lat, bc)), p_(p), opt_(opt) {
    conditioned_ = wiring_.classes.size() == 2 && !wiring_.classes[0].empty() &&
                   !wiring_.classes[1].empty();
    const int ne = static_cast<int>(lat.edges.size());
    if (ne <= opt_.table_max_edges) {
        strategy_ = "table";
        const std::size_t total = std::size_t{1} << ne;
        cdf_.resize(total);
        BondConfig omega = BondConfig::all_closed(lat);
        double acc = 0.0;
        for (std::size_t mask = 0; mask < total; ++mask) {
            for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
            double w = 0.0;
            if (!conditioned_ || event_A(lat, omega, wiring_))
                w = fk_weight(lat, omega, wiring_, p, 2.0);
            acc += w;
            cdf_[mask] = acc;
        }
        if (acc <= 0.0) throw std::runtime_error("ConditionedFkSampler: empty conditioned support");
        for (double& v : cdf_) v /= acc;
        return;
    }
    try {
        FkTransferEngine::Options eopt;
        eopt.wiring = wiring_;
        eopt.condition_no_pm_path = conditioned_;
        eopt.p = p;
        eopt.q = 2.0;
        engine_ = std::make_unique<FkTransferEngine>(lat, std::move(eopt));
        strategy_ = "engine";
        return;
    } catch (const std::invalid_argument&) {
        engine_.reset();
    }
    strategy_ = "rejection";
    rejection_sampler_ = std::make_unique<FkSampler>(lat, wiring_, p);
}

BondConfig ConditionedFkSampler::sample(const RandomSource& rng, std::uint64_t epoch) {
    const Lattice& lat = *lat_;
    const int ne = static_cast<int>(lat.edges.size());
    if (!cdf_.empty()) {
        double u = rng.u(Purpose::es_bond, 0, epoch);
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cdf_[mid] < u) lo = mid + 1;
            else hi = mid;
        }
        BondConfig omega = BondConfig::all_closed(lat);
        for (int e = 0; e < ne; ++e) omega.open[e] = (lo >> e) & 1u;
        return omega;
    }
    if (engine_) {
        std::vector<std::uint8_t> fixed(ne, FkTransferEngine::edge_free);
        BondConfig omega = BondConfig::all_closed(lat);
        for (int e = 0; e < ne; ++e) {
            double pc = engine_->conditional_open(fixed, e);
            bool open = rng.u(Purpose::es_bond, static_cast<std::uint64_t>(e), epoch) < pc;
            fixed[e] = open ? FkTransferEngine::edge_open : FkTransferEngine::edge_closed;
            omega.open[e] = open;
        }
        return omega;
    }
    // Rejection from equilibrated nu^xi sweeps.
    if (!rejection_state_) {
        rejection_state_ = BondConfig::all_open(lat);
        for (int b = 0; b < opt_.rejection_burn_in; ++b)
            rejection_sampler_->sweep(*rejection_state_, rng, rejection_sweeps_done_++);
    }
    while (true) {
        rejection_sampler_->sweep(*rejection_state_, rng, rejection_sweeps_done_++);
        if (!conditioned_ || event_A(lat, *rejection_state_, wiring_)) {
            ++rejection_accepts_;
            return *rejection_state_;
        }
        if (rejection_sweeps_done_ >= opt_.rejection_trial_budget &&
            static_cast<double>(rejection_accepts_ + 1) / static_cast<double>(rejection_sweeps_done_) <
                opt_.min_acceptance)
            throw std::runtime_error(
                "ConditionedFkSampler: rejection acceptance below threshold (P(A^xi) too small)");
    }
}

SpinConfig sample_ising_bc(const Lattice& lat, const BoundaryCondition& bc,
                           ConditionedFkSampler& sampler, const RandomSource& rng,
                           std::uint64_t epoch) {
    (void)bc;
    BondConfig omega = sampler.sample(rng, epoch);
    return ising_from_fk_forced(lat, omega, sampler.wiring(), rng, epoch);
}

} // namespace isinglab
