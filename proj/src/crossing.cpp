#include "isinglab/crossing.hpp"

#include "isinglab/es_coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

bool vertical_crossing(const Lattice& lat, const BondConfig& omega, const SubRect& r) {
    // y1 = 0 or y2 = height+1 extend the rectangle into the boundary rings.
    if (r.x1 < 1 || r.y1 < 0 || r.x2 > lat.width || r.y2 > lat.height + 1 || r.x1 > r.x2 ||
        r.y1 >= r.y2)
        throw std::invalid_argument("vertical_crossing: rectangle outside the lattice");
    auto inside = [&](int site) {
        const Coord c = lat.coords[site];
        return c.x >= r.x1 && c.x <= r.x2 && c.y >= r.y1 && c.y <= r.y2;
    };
    std::vector<std::uint8_t> visited(lat.n_sites, 0);
    std::vector<int> stack;
    for (int x = r.x1; x <= r.x2; ++x) {
        int s = lat.site_at(x, r.y2);
        if (s < 0) continue;
        visited[s] = 1;
        stack.push_back(s);
    }
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        if (lat.coords[s].y == r.y1) return true;
        for (int idx = lat.incident_offset[s]; idx < lat.incident_offset[s + 1]; ++idx) {
            int e = lat.incident_edge[idx];
            if (!omega.open[e]) continue;
            int o = lat.incident_other[idx];
            if (visited[o] || !inside(o)) continue;
            visited[o] = 1;
            stack.push_back(o);
        }
    }
    return false;
}

bool dual_disconnect(const Lattice& lat, const BondConfig& omega, const SubRect& inner) {
    if (inner.x1 <= 1 || inner.y1 <= 1 || inner.x2 >= lat.width || inner.y2 >= lat.height)
        throw std::invalid_argument("dual_disconnect: inner box must be strictly inside the lattice");
    std::vector<std::uint8_t> visited(lat.n_sites, 0);
    std::vector<int> stack;
    for (int y = inner.y1; y <= inner.y2; ++y)
        for (int x = inner.x1; x <= inner.x2; ++x) {
            int s = lat.interior_id(x, y);
            visited[s] = 1;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        if (!lat.is_interior(s)) return false; // reached a boundary site
        for (int idx = lat.incident_offset[s]; idx < lat.incident_offset[s + 1]; ++idx) {
            int e = lat.incident_edge[idx];
            if (!omega.open[e]) continue;
            int o = lat.incident_other[idx];
            if (visited[o]) continue;
            visited[o] = 1;
            stack.push_back(o);
        }
    }
    return true;
}

bool cluster_connected(const Lattice& lat, const BondConfig& omega, const WiringPartition& wiring,
                       int site_a, int site_b) {
    ClusterStructure cs = count_clusters(lat, omega, wiring).second;
    return cs.same_cluster(site_a, site_b);
}

CrossingReport estimate_crossing(int r, int r_prime, const std::string& bc_spec, double p, long samples,
                                 const RandomSource& rng, const EstimateOptions& opt) {
    Box box = build_box(r, r_prime, bc_spec);
    WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
    SubRect full{1, 1, r, r_prime};
    CrossingReport rep = estimate_fk_event(
        box.lat, wiring, p, samples, rng,
        [&](const BondConfig& om) { return vertical_crossing(box.lat, om, full); }, opt);
    rep.bc = box.bc.label;
    rep.rho = static_cast<double>(r_prime) / r;
    return rep;
}

std::vector<CrossingReport> strip_decay_profile(int r, const std::vector<double>& rho_list,
                                                const std::string& bc_spec, double p, long samples,
                                                const RandomSource& rng, const EstimateOptions& opt) {
    std::vector<CrossingReport> out;
    for (std::size_t i = 0; i < rho_list.size(); ++i) {
        double rho = rho_list[i];
        int height = static_cast<int>(std::lround(rho * r));
        if (height < 1) throw std::invalid_argument("strip_decay_profile: rho too small");
        CrossingReport rep =
            estimate_crossing(r, height, bc_spec, p, samples, rng.fork(1000 + i), opt);
        rep.rho = rho;
        out.push_back(rep);
    }
    return out;
}

CrossingReport two_point_connectivity(int r, int r_prime, const std::string& bc_spec, double p,
                                      Coord a, Coord b, long samples, const RandomSource& rng,
                                      const EstimateOptions& opt) {
    Box box = build_box(r, r_prime, bc_spec);
    if (!box.lat.in_interior(a.x, a.y) || !box.lat.in_interior(b.x, b.y))
        throw std::invalid_argument("two_point_connectivity: sites outside the interior");
    WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
    int sa = box.lat.interior_id(a.x, a.y);
    int sb = box.lat.interior_id(b.x, b.y);
    if (sa == sb) {
        CrossingReport rep;
        rep.r = r;
        rep.r_prime = r_prime;
        rep.bc = box.bc.label;
        rep.p = p;
        rep.samples = samples;
        rep.estimate = 1.0;
        return rep;
    }
    CrossingReport rep = estimate_fk_event(
        box.lat, wiring, p, samples, rng,
        [&](const BondConfig& om) { return cluster_connected(box.lat, om, wiring, sa, sb); }, opt);
    rep.bc = box.bc.label;
    return rep;
}

} // namespace isinglab
