#include "isinglab/fk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace isinglab {

namespace {

constexpr int max_slots = 14;
constexpr int inactive = -1;

// Flag bits per class.
constexpr std::uint8_t f_wire_p = 1;
constexpr std::uint8_t f_wire_m = 2;
constexpr std::uint8_t f_mark_a = 4;
constexpr std::uint8_t f_mark_b = 8;
constexpr std::uint8_t wire_bits = f_wire_p | f_wire_m;
constexpr std::uint8_t mark_bits = f_mark_a | f_mark_b;

struct Key {
    std::uint64_t part;
    std::uint64_t flags;
    bool operator==(const Key& o) const { return part == o.part && flags == o.flags; }
};

struct KeyHash {
    std::size_t operator()(const Key& k) const {
        std::uint64_t h = k.part * 0x9e3779b97f4a7c15ULL;
        h ^= (k.flags + 0xbf58476d1ce4e5b9ULL) * 0x94d049bb133111ebULL;
        h ^= h >> 29;
        return static_cast<std::size_t>(h * 0xff51afd7ed558ccdULL);
    }
};

// Unpacked working state for one transfer configuration.
struct Work {
    std::int8_t cls[max_slots];    // class label per slot, -1 inactive
    std::uint8_t cflags[max_slots]; // flags per class label
    std::uint8_t pm_merged;
};

Key pack(const Work& w, int n_slots) {
    Key k{0, 0};
    for (int s = 0; s < n_slots; ++s) {
        k.part |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(w.cls[s]) & 0xF) << (4 * s);
    }
    int n_cls = 0;
    for (int s = 0; s < n_slots; ++s)
        if (w.cls[s] >= 0) n_cls = std::max(n_cls, w.cls[s] + 1);
    for (int c = 0; c < n_cls; ++c) k.flags |= static_cast<std::uint64_t>(w.cflags[c] & 0xF) << (4 * c);
    k.flags |= static_cast<std::uint64_t>(w.pm_merged) << 60;
    return k;
}

void unpack(const Key& k, int n_slots, Work& w) {
    for (int s = 0; s < n_slots; ++s) {
        std::uint8_t v = (k.part >> (4 * s)) & 0xF;
        w.cls[s] = (v == 0xF) ? inactive : static_cast<std::int8_t>(v);
    }
    for (int c = 0; c < max_slots; ++c) w.cflags[c] = (k.flags >> (4 * c)) & 0xF;
    w.pm_merged = (k.flags >> 60) & 1;
}

// Relabel classes in first-occurrence order over slots; drop labels with no
// active slot. Returns number of classes.
int canonicalize(Work& w, int n_slots) {
    std::int8_t remap[max_slots];
    std::uint8_t new_flags[max_slots];
    std::memset(remap, -1, sizeof remap);
    int next = 0;
    for (int s = 0; s < n_slots; ++s) {
        std::int8_t c = w.cls[s];
        if (c < 0) continue;
        if (remap[c] < 0) {
            remap[c] = static_cast<std::int8_t>(next);
            new_flags[next] = w.cflags[c];
            ++next;
        }
        w.cls[s] = remap[c];
    }
    for (int c = 0; c < next; ++c) w.cflags[c] = new_flags[c];
    for (int c = next; c < max_slots; ++c) w.cflags[c] = 0;
    return next;
}

} // namespace

FkTransferEngine::FkTransferEngine(const Lattice& lat, Options opt) : lat_(&lat), opt_(std::move(opt)) {
    if (opt_.wiring.classes.size() > 2)
        throw std::invalid_argument("FkTransferEngine: at most two wiring classes supported");
    has_m_class_ = opt_.wiring.classes.size() == 2 && !opt_.wiring.classes[1].empty();

    const int ne = static_cast<int>(lat.edges.size());
    order_.resize(ne);
    for (int e = 0; e < ne; ++e) order_[e] = e;
    auto band = [&](int e) {
        const Coord& ca = lat.coords[lat.edges[e].a];
        const Coord& cb = lat.coords[lat.edges[e].b];
        return std::max(ca.y, cb.y) * 1000 + std::min(ca.y, cb.y);
    };
    std::stable_sort(order_.begin(), order_.end(), [&](int e1, int e2) {
        int b1 = band(e1), b2 = band(e2);
        if (b1 != b2) return b1 < b2;
        int x1 = std::max(lat.coords[lat.edges[e1].a].x, lat.coords[lat.edges[e1].b].x);
        int x2 = std::max(lat.coords[lat.edges[e2].a].x, lat.coords[lat.edges[e2].b].x);
        if (x1 != x2) return x1 < x2;
        return e1 < e2;
    });

    first_pos_.assign(lat.n_sites, -1);
    last_pos_.assign(lat.n_sites, -1);
    for (int pos = 0; pos < ne; ++pos) {
        const Edge& e = lat.edges[order_[pos]];
        for (int v : {e.a, e.b}) {
            if (first_pos_[v] < 0) first_pos_[v] = pos;
            last_pos_[v] = pos;
        }
    }
    retire_at_.assign(ne, {});
    for (int v = 0; v < lat.n_sites; ++v)
        if (last_pos_[v] >= 0) retire_at_[last_pos_[v]].push_back(v);
    for (auto& lst : retire_at_) std::sort(lst.begin(), lst.end());

    // Slot assignment by free-list simulation.
    slot_of_.assign(lat.n_sites, -1);
    std::vector<std::uint8_t> in_use(max_slots, 0);
    for (int pos = 0; pos < ne; ++pos) {
        const Edge& e = lat.edges[order_[pos]];
        for (int v : {e.a, e.b}) {
            if (first_pos_[v] != pos || slot_of_[v] >= 0) continue;
            int slot = 0;
            while (slot < max_slots && in_use[slot]) ++slot;
            if (slot == max_slots)
                throw std::invalid_argument("FkTransferEngine: frontier exceeds supported width");
            slot_of_[v] = slot;
            in_use[slot] = 1;
            max_slots_used_ = std::max(max_slots_used_, slot + 1);
        }
        for (int v : retire_at_[pos]) in_use[slot_of_[v]] = 0;
    }

    site_init_flags_.assign(lat.n_sites, 0);
    for (std::size_t c = 0; c < opt_.wiring.classes.size(); ++c)
        for (int s : opt_.wiring.classes[c])
            site_init_flags_[s] |= (c == 0) ? f_wire_p : f_wire_m;
    for (int s : opt_.mark_a_sites) site_init_flags_[s] |= f_mark_a;
    for (int s : opt_.mark_b_sites) site_init_flags_[s] |= f_mark_b;
}

double FkTransferEngine::run(const std::vector<std::uint8_t>& fixed, int query_edge, bool event_mode) {
    const Lattice& lat = *lat_;
    const int ne = static_cast<int>(lat.edges.size());
    if (static_cast<int>(fixed.size()) != ne)
        throw std::invalid_argument("FkTransferEngine: fixed vector has wrong size");
    if (query_edge >= 0 && fixed[query_edge] != edge_free)
        throw std::invalid_argument("FkTransferEngine: query edge must be free");

    const double p = opt_.p, q = opt_.q;
    const int n_slots = max_slots_used_;

    using Map = std::unordered_map<Key, Pair, KeyHash>;
    Map cur, nxt;
    cur.reserve(64);
    {
        Work w{};
        std::memset(w.cls, -1, sizeof w.cls);
        std::memset(w.cflags, 0, sizeof w.cflags);
        w.pm_merged = 0;
        // In event mode sel carries the not-yet-violated mass.
        cur.emplace(pack(w, n_slots), Pair{1.0, event_mode ? 1.0 : 0.0});
    }

    Work w{};
    for (int pos = 0; pos < ne; ++pos) {
        const int e = order_[pos];
        const Edge& ed = lat.edges[e];
        nxt.clear();
        nxt.reserve(cur.size() * 2 + 16);
        for (const auto& [key, wt] : cur) {
            unpack(key, n_slots, w);
            int n_cls = 0;
            for (int s = 0; s < n_slots; ++s)
                if (w.cls[s] >= 0) n_cls = std::max(n_cls, static_cast<int>(w.cls[s]) + 1);
            // Activate endpoints.
            bool both_marks_on_activation = false;
            for (int v : {ed.a, ed.b}) {
                if (first_pos_[v] == pos && w.cls[slot_of_[v]] < 0) {
                    w.cls[slot_of_[v]] = static_cast<std::int8_t>(n_cls);
                    w.cflags[n_cls] = site_init_flags_[v];
                    if ((site_init_flags_[v] & f_mark_a) && (site_init_flags_[v] & f_mark_b))
                        both_marks_on_activation = true;
                    ++n_cls;
                }
            }
            const int cu = w.cls[slot_of_[ed.a]];
            const int cv = w.cls[slot_of_[ed.b]];

            for (int branch = 0; branch < 2; ++branch) {
                // branch 0 = closed, 1 = open
                if (fixed[e] == edge_closed && branch == 1) continue;
                if (fixed[e] == edge_open && branch == 0) continue;
                Work nw = w;
                Pair nwt = wt;
                double factor = branch ? p : (1.0 - p);
                nwt.tot *= factor;
                nwt.sel *= factor;
                if (query_edge == e) nwt.sel = branch ? nwt.tot : 0.0;
                if (event_mode && both_marks_on_activation) nwt.sel = 0.0;

                if (branch == 1 && cu != cv) {
                    int keep = std::min(cu, cv), drop = std::max(cu, cv);
                    std::uint8_t uf = nw.cflags[keep] | nw.cflags[drop];
                    if ((uf & f_wire_p) && (uf & f_wire_m)) {
                        if (opt_.condition_no_pm_path) continue; // state dies
                        nw.pm_merged = 1;
                        // P and M are one cluster now; a single wire bit
                        // represents it.
                    }
                    if ((uf & f_mark_a) && (uf & f_mark_b)) {
                        nwt.sel = 0.0; // event violated on this history
                    }
                    nw.cflags[keep] = uf;
                    for (int s = 0; s < n_slots; ++s)
                        if (nw.cls[s] == drop) nw.cls[s] = static_cast<std::int8_t>(keep);
                    nw.cflags[drop] = 0;
                }

                // Retirements at this position.
                for (int v : retire_at_[pos]) {
                    int slot = slot_of_[v];
                    int c = nw.cls[slot];
                    nw.cls[slot] = inactive;
                    bool still_active = false;
                    for (int s = 0; s < n_slots; ++s)
                        if (nw.cls[s] == c) {
                            still_active = true;
                            break;
                        }
                    if (!still_active && !(nw.cflags[c] & wire_bits)) {
                        nwt.tot *= q;
                        nwt.sel *= q;
                    }
                }

                if (event_mode && nwt.sel == 0.0) {
                    // Marks are irrelevant on violated histories.
                    for (int c = 0; c < max_slots; ++c) nw.cflags[c] &= static_cast<std::uint8_t>(~mark_bits);
                }
                canonicalize(nw, n_slots);
                Pair& acc = nxt[pack(nw, n_slots)];
                acc.tot += nwt.tot;
                acc.sel += nwt.sel;
            }
        }
        cur.swap(nxt);
        peak_states_ = std::max(peak_states_, cur.size());
        if (cur.size() > 2'000'000) throw std::runtime_error("FkTransferEngine: state space blow-up");
    }

    // Wiring clusters contribute their q factors at the end.
    int n_wire = static_cast<int>(opt_.wiring.classes.size());
    if (n_wire == 2 && opt_.wiring.classes[1].empty()) n_wire = 1;
    if (n_wire >= 1 && opt_.wiring.classes[0].empty()) --n_wire;
    double tot = 0.0, sel = 0.0;
    for (const auto& [key, wt] : cur) {
        int nw_here = n_wire;
        if (n_wire == 2 && ((key.flags >> 60) & 1)) nw_here = 1;
        double f = std::pow(q, nw_here);
        tot += wt.tot * f;
        sel += wt.sel * f;
    }
    if (tot <= 0.0) throw std::runtime_error("FkTransferEngine: zero partition mass (contradictory fixing)");
    return sel / tot;
}

double FkTransferEngine::conditional_open(const std::vector<std::uint8_t>& fixed, int query_edge) {
    return run(fixed, query_edge, false);
}

double FkTransferEngine::event_probability(const std::vector<std::uint8_t>& fixed) {
    return run(fixed, -1, true);
}

double fk_disconnection_probability(const Lattice& lat, const WiringPartition& wiring, double p,
                                    double q, const std::vector<int>& from_sites,
                                    const std::vector<int>& to_sites, bool condition_no_pm_path) {
    FkTransferEngine::Options opt;
    opt.wiring = wiring;
    opt.p = p;
    opt.q = q;
    opt.condition_no_pm_path = condition_no_pm_path;
    opt.mark_a_sites = from_sites;
    opt.mark_b_sites = to_sites;
    FkTransferEngine engine(lat, opt);
    std::vector<std::uint8_t> fixed(lat.edges.size(), FkTransferEngine::edge_free);
    return engine.event_probability(fixed);
}

} // namespace isinglab
