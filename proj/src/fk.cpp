#include "isinglab/fk.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

WiringPartition WiringPartition::wired(const Lattice& lat) {
    WiringPartition w;
    if (lat.n_sites > lat.n_interior) {
        w.classes.emplace_back();
        for (int s = lat.n_interior; s < lat.n_sites; ++s) w.classes.back().push_back(s);
    }
    return w;
}

ClusterStructure::ClusterStructure(const Lattice& lat, const WiringPartition& wiring) {
    parent_.resize(lat.n_sites);
    rep_.resize(lat.n_sites);
    for (int i = 0; i < lat.n_sites; ++i) {
        parent_[i] = i;
        rep_[i] = i;
    }
    count_ = lat.n_sites;
    for (const auto& cls : wiring.classes)
        for (std::size_t i = 1; i < cls.size(); ++i) unite(cls[0], cls[i]);
}

int ClusterStructure::find(int site) const {
    while (parent_[site] != site) {
        parent_[site] = parent_[parent_[site]];
        site = parent_[site];
    }
    return site;
}

void ClusterStructure::unite(int a, int b) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (ra > rb) std::swap(ra, rb);
    parent_[rb] = ra;
    if (rep_[rb] < rep_[ra]) rep_[ra] = rep_[rb];
    --count_;
}

std::pair<int, ClusterStructure> count_clusters(const Lattice& lat, const BondConfig& omega,
                                                const WiringPartition& wiring) {
    ClusterStructure cs(lat, wiring);
    for (int e = 0; e < static_cast<int>(lat.edges.size()); ++e)
        if (omega.open[e]) cs.add_edge(lat, e);
    return {cs.cluster_count(), std::move(cs)};
}

double fk_weight(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring, double p,
                 double q) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("fk_weight: p must lie in (0,1)");
    if (q <= 0.0) throw std::invalid_argument("fk_weight: q must be positive");
    int o = omega.open_count();
    int c = static_cast<int>(lat.edges.size()) - o;
    int k = count_clusters(lat, omega, wiring).first;
    return std::pow(p, o) * std::pow(1.0 - p, c) * std::pow(q, k);
}

ExactDistribution fk_exact(const Lattice& lat, const WiringPartition& wiring, double p, double q) {
    const int ne = static_cast<int>(lat.edges.size());
    if (ne > 24) throw std::invalid_argument("fk_exact: more than 24 edges");
    const std::size_t total = std::size_t{1} << ne;
    ExactDistribution dist;
    dist.p.assign(total, 0.0);
    double z = 0.0;
    BondConfig omega = BondConfig::all_closed(lat);
    for (std::size_t mask = 0; mask < total; ++mask) {
        for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
        double w = fk_weight(lat, omega, wiring, p, q);
        dist.p[mask] = w;
        z += w;
    }
    for (double& v : dist.p) v /= z;
    return dist;
}

double bond_conditional_prob(const Lattice& lat, const BondConfig& omega, int edge,
                             const WiringPartition& wiring, double p) {
    if (p == 0.0) return 0.0;
    ClusterStructure cs(lat, wiring);
    for (int e = 0; e < static_cast<int>(lat.edges.size()); ++e)
        if (omega.open[e] && e != edge) cs.add_edge(lat, e);
    bool conn = cs.same_cluster(lat.edges[edge].a, lat.edges[edge].b);
    return conn ? p : p / (p + 2.0 * (1.0 - p));
}

FkSampler::FkSampler(const Lattice& lat, const WiringPartition& wiring, double p) : lat_(&lat), p_(p) {
    p_disconnected_ = (p == 0.0) ? 0.0 : p / (p + 2.0 * (1.0 - p));
    wire_class_.assign(lat.n_sites, -1);
    class_sites_.resize(wiring.classes.size());
    for (std::size_t c = 0; c < wiring.classes.size(); ++c) {
        class_sites_[c] = wiring.classes[c];
        for (int s : wiring.classes[c]) wire_class_[s] = static_cast<int>(c);
    }
    for (int side = 0; side < 2; ++side) {
        stamp_[side].assign(lat.n_sites, 0);
        class_stamp_[side].assign(wiring.classes.size(), 0);
        queue_[side].reserve(lat.n_sites);
    }
}

bool FkSampler::connected_without(const BondConfig& omega, int edge) {
    const Lattice& lat = *lat_;
    const int u = lat.edges[edge].a, v = lat.edges[edge].b;
    if (u == v) return true;
    ++epoch_;

    auto visit = [&](int side, int site) -> bool {
        // Returns true if the other side already reached `site`.
        if (stamp_[side ^ 1][site] == epoch_) return true;
        if (stamp_[side][site] == epoch_) return false;
        stamp_[side][site] = epoch_;
        queue_[side].push_back(site);
        return false;
    };

    queue_[0].clear();
    queue_[1].clear();
    std::size_t head[2] = {0, 0};
    if (visit(0, u)) return true;
    if (visit(1, v)) return true;

    // Expand the side with the smaller remaining frontier; a side that runs
    // out of frontier has explored its whole component without meeting the
    // other, proving disconnection.
    while (true) {
        bool f0 = head[0] < queue_[0].size();
        bool f1 = head[1] < queue_[1].size();
        if (!f0 || !f1) return false;
        int side = (queue_[0].size() - head[0] <= queue_[1].size() - head[1]) ? 0 : 1;
        int site = queue_[side][head[side]++];
        for (int idx = lat.incident_offset[site]; idx < lat.incident_offset[site + 1]; ++idx) {
            int e = lat.incident_edge[idx];
            if (e == edge || !omega.open[e]) continue;
            if (visit(side, lat.incident_other[idx])) return true;
        }
        int wc = wire_class_[site];
        if (wc >= 0 && class_stamp_[side][wc] != epoch_) {
            class_stamp_[side][wc] = epoch_;
            if (class_stamp_[side ^ 1][wc] == epoch_) return true;
            for (int s : class_sites_[wc])
                if (visit(side, s)) return true;
        }
    }
}

void FkSampler::sweep(BondConfig& omega, const RandomSource& rng, std::uint64_t sweep_index) {
    const int ne = static_cast<int>(lat_->edges.size());
    for (int e = 0; e < ne; ++e) {
        double u = rng.u(Purpose::bond_sweep, static_cast<std::uint64_t>(e), sweep_index);
        std::uint8_t value;
        if (u < p_disconnected_) value = 1;
        else if (u >= p_) value = 0;
        else value = connected_without(omega, e) ? 1 : 0;
        omega.open[e] = value;
    }
}

WiringPartition domain_markov_restrict(const Lattice& lat, const std::vector<int>& exposed_edges,
                                       const std::vector<std::uint8_t>& exposed_values,
                                       const WiringPartition& wiring) {
    if (exposed_edges.size() != exposed_values.size())
        throw std::invalid_argument("domain_markov_restrict: edges/values size mismatch");
    ClusterStructure cs(lat, wiring);
    for (std::size_t i = 0; i < exposed_edges.size(); ++i)
        if (exposed_values[i]) cs.add_edge(lat, exposed_edges[i]);
    // Sites on the interface of the unexposed subgraph (endpoints of exposed
    // edges) plus originally wired sites, grouped by their cluster.
    std::vector<int> interface;
    for (int e : exposed_edges) {
        interface.push_back(lat.edges[e].a);
        interface.push_back(lat.edges[e].b);
    }
    for (const auto& cls : wiring.classes)
        for (int s : cls) interface.push_back(s);
    std::sort(interface.begin(), interface.end());
    interface.erase(std::unique(interface.begin(), interface.end()), interface.end());

    std::vector<std::pair<int, int>> root_site;
    root_site.reserve(interface.size());
    for (int s : interface) root_site.emplace_back(cs.find(s), s);
    std::sort(root_site.begin(), root_site.end());
    WiringPartition out;
    std::size_t i = 0;
    while (i < root_site.size()) {
        std::size_t j = i;
        while (j < root_site.size() && root_site[j].first == root_site[i].first) ++j;
        if (j - i >= 2) {
            out.classes.emplace_back();
            for (std::size_t k = i; k < j; ++k) out.classes.back().push_back(root_site[k].second);
        }
        i = j;
    }
    return out;
}

std::string wiring_dump(const WiringPartition& wiring) {
    std::string out;
    for (std::size_t c = 0; c < wiring.classes.size(); ++c) {
        out += std::to_string(c) + ":";
        for (std::size_t i = 0; i < wiring.classes[c].size(); ++i) {
            if (i) out += ",";
            out += std::to_string(wiring.classes[c][i]);
        }
        out += "\n";
    }
    return out;
}

} // namespace isinglab
