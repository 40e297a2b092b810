#include "isinglab/exposure.hpp"

#include "isinglab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isinglab {

std::size_t ExposureRunner::NodeKeyHash::operator()(const NodeKey& k) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::uint64_t v : k.w) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 33));
}

namespace {

bool same_partition(const WiringPartition& a, const WiringPartition& b) {
    auto canon = [](const WiringPartition& w) {
        std::vector<std::vector<int>> cls;
        for (const auto& c : w.classes) {
            if (c.size() < 2) continue; // singleton/empty classes wire nothing
            auto v = c;
            std::sort(v.begin(), v.end());
            cls.push_back(std::move(v));
        }
        std::sort(cls.begin(), cls.end());
        return cls;
    };
    return canon(a) == canon(b);
}

bool conditioning_vacuous(const WiringPartition& w) {
    return w.classes.size() < 2 || w.classes[0].empty() || w.classes[1].empty();
}

} // namespace

ExposureRunner::ExposureRunner(const Lattice& lat, const BoundaryCondition& xi,
                               const BoundaryCondition& eta, Options opt)
    : lat_(&lat), opt_(opt) {
    wiring_xi_ = wiring_from_bc(lat, xi);
    wiring_eta_ = wiring_from_bc(lat, eta);

    // The pair must differ only on the allowed boundary rows.
    for (int s = lat.n_interior; s < lat.n_sites; ++s) {
        const Coord c = lat.coords[s];
        bool allowed = (c.y == 0) || (opt_.two_sided && c.y == lat.height + 1);
        if (!allowed && xi.boundary_spin(lat, s) != eta.boundary_spin(lat, s))
            throw std::invalid_argument("ExposureRunner: bc pair differs off the seed boundary");
    }

    for (int x = 1; x <= lat.width; ++x) {
        if (lat.bottom_id[x - 1] >= 0) seed_sites_.push_back(lat.bottom_id[x - 1]);
        if (opt_.two_sided && lat.top_id[x - 1] >= 0) seed_sites_top_.push_back(lat.top_id[x - 1]);
    }

    WiringPartition wired = WiringPartition::wired(lat);
    const double p = opt_.p > 0.0 ? opt_.p : p_self_dual;
    auto make_engine = [&](const WiringPartition& w, bool condition) {
        FkTransferEngine::Options eopt;
        eopt.wiring = w;
        eopt.condition_no_pm_path = condition;
        eopt.p = p;
        eopt.q = 2.0;
        return std::make_unique<FkTransferEngine>(lat, std::move(eopt));
    };

    legs_[0].engine = make_engine(wired, false);
    if (opt_.want_conditioned) {
        try {
            for (int i : {1, 2}) {
                const WiringPartition& w = (i == 1) ? wiring_xi_ : wiring_eta_;
                if (same_partition(w, wired) && conditioning_vacuous(w)) {
                    legs_[i].alias_of = 0;
                } else if (i == 2 && same_partition(w, wiring_xi_) &&
                           conditioning_vacuous(w) == conditioning_vacuous(wiring_xi_)) {
                    legs_[i].alias_of = 1;
                } else {
                    legs_[i].engine = make_engine(w, !conditioning_vacuous(w));
                }
            }
            legs_enabled_ = true;
        } catch (const std::invalid_argument&) {
            legs_[1].engine.reset();
            legs_[2].engine.reset();
            legs_enabled_ = false;
        }
    }
}

std::size_t ExposureRunner::cache_size() const {
    std::size_t n = 0;
    for (const auto& l : legs_) n += l.cache.size();
    return n;
}

double ExposureRunner::leg_conditional(int leg, const std::vector<std::uint8_t>& fixed, int depth,
                                       int edge) {
    int target = leg;
    while (legs_[target].alias_of >= 0) target = legs_[target].alias_of;
    Leg& l = legs_[target];
    const int ne = static_cast<int>(fixed.size());
    bool use_cache = ne <= 89 && depth <= opt_.cache_max_depth && l.cache.size() < opt_.cache_max_entries;
    NodeKey key{};
    if (use_cache) {
        for (int e = 0; e < ne; ++e)
            key.w[e >> 5] |= static_cast<std::uint64_t>(fixed[e] & 3u) << ((e & 31) * 2);
        key.w[2] ^= static_cast<std::uint64_t>(edge) << 50;
        auto it = l.cache.find(key);
        if (it != l.cache.end()) return it->second;
    }
    double p = l.engine->conditional_open(fixed, edge);
    if (use_cache) l.cache.emplace(key, p);
    return p;
}

GrandCoupling ExposureRunner::run(const RandomSource& rng, std::uint64_t run_index) {
    const Lattice& lat = *lat_;
    const int ne = static_cast<int>(lat.edges.size());

    GrandCoupling gc;
    gc.conditioned_legs = legs_enabled_;
    gc.omega_wired = BondConfig::all_closed(lat);
    gc.omega_xi = BondConfig::all_closed(lat);
    gc.omega_eta = BondConfig::all_closed(lat);
    gc.exposure.in_xi.assign(lat.n_sites, 0);
    gc.exposure.in_xi_top.assign(opt_.two_sided ? lat.n_sites : 0, 0);
    gc.exposure.exposed.reserve(ne);

    std::vector<std::uint8_t> fixed[3];
    fixed[0].assign(ne, FkTransferEngine::edge_free);
    if (legs_enabled_) {
        fixed[1].assign(ne, FkTransferEngine::edge_free);
        fixed[2].assign(ne, FkTransferEngine::edge_free);
    }

    auto height_of = [&](int site) { return lat.coords[site].y; };
    for (int s : seed_sites_) {
        gc.exposure.in_xi[s] = 1;
        gc.exposure.max_height = std::max(gc.exposure.max_height, height_of(s));
    }
    gc.exposure.min_height_from_top = lat.height + 1;
    for (int s : seed_sites_top_) {
        gc.exposure.in_xi_top[s] = 1;
        gc.exposure.min_height_from_top = std::min(gc.exposure.min_height_from_top, height_of(s));
    }

    std::vector<std::uint8_t> edge_exposed(ne, 0);
    auto touches_growth = [&](int e) {
        const Edge& ed = lat.edges[e];
        bool t = gc.exposure.in_xi[ed.a] || gc.exposure.in_xi[ed.b];
        if (opt_.two_sided) t = t || gc.exposure.in_xi_top[ed.a] || gc.exposure.in_xi_top[ed.b];
        return t;
    };

    for (int step = 0; step < ne; ++step) {
        int e = -1;
        for (int cand = 0; cand < ne; ++cand) {
            if (edge_exposed[cand]) continue;
            if (touches_growth(cand)) {
                e = cand;
                break;
            }
        }
        if (e < 0) {
            if (gc.exposure.T < 0) gc.exposure.T = step;
            for (int cand = 0; cand < ne; ++cand)
                if (!edge_exposed[cand]) {
                    e = cand;
                    break;
                }
        }
        const double u = rng.u(Purpose::exposure_edge, static_cast<std::uint64_t>(e), run_index);
        const int legs = legs_enabled_ ? 3 : 1;
        for (int leg = 0; leg < legs; ++leg) {
            double pc = leg_conditional(leg, fixed[leg], step, e);
            bool open = u < pc;
            fixed[leg][e] = open ? FkTransferEngine::edge_open : FkTransferEngine::edge_closed;
            BondConfig& target = (leg == 0) ? gc.omega_wired : (leg == 1) ? gc.omega_xi : gc.omega_eta;
            target.open[e] = open;
        }
        edge_exposed[e] = 1;
        gc.exposure.exposed.push_back(e);

        if (gc.exposure.T < 0 && gc.omega_wired.open[e]) {
            const Edge& ed = lat.edges[e];
            if (gc.exposure.in_xi[ed.a] || gc.exposure.in_xi[ed.b]) {
                for (int v : {ed.a, ed.b})
                    if (!gc.exposure.in_xi[v]) {
                        gc.exposure.in_xi[v] = 1;
                        gc.exposure.max_height = std::max(gc.exposure.max_height, height_of(v));
                    }
            }
            if (opt_.two_sided && (gc.exposure.in_xi_top[ed.a] || gc.exposure.in_xi_top[ed.b])) {
                for (int v : {ed.a, ed.b})
                    if (!gc.exposure.in_xi_top[v]) {
                        gc.exposure.in_xi_top[v] = 1;
                        gc.exposure.min_height_from_top =
                            std::min(gc.exposure.min_height_from_top, height_of(v));
                    }
            }
        }
    }
    if (gc.exposure.T < 0) gc.exposure.T = ne;

    if (!legs_enabled_) {
        gc.omega_xi = gc.omega_wired;
        gc.omega_eta = gc.omega_wired;
    }
    return gc;
}

bool check_domination(const GrandCoupling& gc) {
    for (std::size_t e = 0; e < gc.omega_wired.open.size(); ++e) {
        if (gc.omega_xi.open[e] > gc.omega_wired.open[e]) return false;
        if (gc.omega_eta.open[e] > gc.omega_wired.open[e]) return false;
    }
    return true;
}

bool check_closed_interface(const Lattice& lat, const GrandCoupling& gc) {
    for (int e = 0; e < static_cast<int>(lat.edges.size()); ++e) {
        const Edge& ed = lat.edges[e];
        bool a_in = gc.exposure.in_xi[ed.a], b_in = gc.exposure.in_xi[ed.b];
        if (a_in != b_in && gc.omega_wired.open[e]) return false;
    }
    return true;
}

bool xi_confined(const Lattice& lat, const GrandCoupling& gc, double rho) {
    double limit = rho * lat.width;
    return static_cast<double>(gc.exposure.max_height) < limit;
}

std::pair<SpinConfig, SpinConfig> couple_remainder(const Lattice& lat, const GrandCoupling& gc,
                                                   const WiringPartition& wxi,
                                                   const WiringPartition& weta, const RandomSource& rng,
                                                   std::uint64_t run_index) {
    if (!gc.conditioned_legs)
        throw std::runtime_error("couple_remainder: conditioned legs were not constructed");
    SpinConfig sx = ising_from_fk_forced(lat, gc.omega_xi, wxi, rng, run_index);
    SpinConfig se = ising_from_fk_forced(lat, gc.omega_eta, weta, rng, run_index);
    return {std::move(sx), std::move(se)};
}

SpatialMixingResult spatial_mixing_tv_exact(int r, int r_prime, double rho, const std::string& xi_spec,
                                            const std::string& eta_spec, double beta) {
    Box bx = build_box(r, r_prime, xi_spec);
    Box be = build_box(r, r_prime, eta_spec);
    int y0 = static_cast<int>(std::ceil(rho * r - 1e-9));
    if (y0 < 1 || y0 > r_prime) throw std::invalid_argument("spatial_mixing_tv_exact: rho out of range");

    std::vector<double> mx = row_marginal_exact(bx.lat, bx.bc, beta, y0);
    std::vector<double> me = row_marginal_exact(be.lat, be.bc, beta, y0);
    SpatialMixingResult out;
    double s = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) s += std::fabs(mx[i] - me[i]);
    out.tv = 0.5 * s;

    // Exact confinement probability of Xi under nu^1 on the same box.
    std::vector<int> gamma, high;
    for (int x = 1; x <= r; ++x)
        if (bx.lat.bottom_id[x - 1] >= 0) gamma.push_back(bx.lat.bottom_id[x - 1]);
    for (int y = y0; y <= r_prime; ++y)
        for (int x = 1; x <= r; ++x) high.push_back(bx.lat.interior_id(x, y));
    out.confined_prob = fk_disconnection_probability(bx.lat, WiringPartition::wired(bx.lat),
                                                     p_self_dual, 2.0, gamma, high);
    out.coupling_bound = 1.0 - out.confined_prob;
    return out;
}

} // namespace isinglab
