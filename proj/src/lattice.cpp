#include "isinglab/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace isinglab {

int Lattice::site_at(int x, int y) const {
    if (in_interior(x, y)) return interior_id(x, y);
    if (y == 0 && x >= 1 && x <= width) return bottom_id[x - 1];
    if (y == height + 1 && x >= 1 && x <= width) return top_id[x - 1];
    if (x == 0 && y >= 1 && y <= height) return left_id[y - 1];
    if (x == width + 1 && y >= 1 && y <= height) return right_id[y - 1];
    return -1;
}

Lattice Lattice::build(int w, int h, bool wrap_x, bool wrap_y,
                       const std::vector<std::uint8_t>& exists) {
    if (w < 1 || h < 1) throw std::invalid_argument("lattice dimensions must be positive");
    if (wrap_x && w < 2) throw std::invalid_argument("horizontal wrap needs width >= 2");
    if (wrap_y && h < 2) throw std::invalid_argument("vertical wrap needs height >= 2");
    if (static_cast<int>(exists.size()) != 2 * w + 2 * h)
        throw std::invalid_argument("boundary existence mask has wrong size");

    Lattice lat;
    lat.width = w;
    lat.height = h;
    lat.wrap_x = wrap_x;
    lat.wrap_y = wrap_y;
    lat.n_interior = w * h;
    lat.coords.reserve(lat.n_interior + 2 * (w + h));
    for (int y = 1; y <= h; ++y)
        for (int x = 1; x <= w; ++x) lat.coords.push_back({x, y});

    lat.bottom_id.assign(w, -1);
    lat.top_id.assign(w, -1);
    lat.left_id.assign(h, -1);
    lat.right_id.assign(h, -1);
    int next = lat.n_interior;
    for (int x = 1; x <= w; ++x)
        if (exists[x - 1]) {
            lat.bottom_id[x - 1] = next++;
            lat.coords.push_back({x, 0});
        }
    for (int x = 1; x <= w; ++x)
        if (exists[w + x - 1]) {
            lat.top_id[x - 1] = next++;
            lat.coords.push_back({x, h + 1});
        }
    for (int y = 1; y <= h; ++y)
        if (exists[2 * w + y - 1]) {
            lat.left_id[y - 1] = next++;
            lat.coords.push_back({0, y});
        }
    for (int y = 1; y <= h; ++y)
        if (exists[2 * w + h + y - 1]) {
            lat.right_id[y - 1] = next++;
            lat.coords.push_back({w + 1, y});
        }
    lat.n_sites = next;

    // Horizontal edges, row-major.
    for (int y = 1; y <= h; ++y) {
        if (!wrap_x && lat.left_id[y - 1] >= 0)
            lat.edges.push_back({lat.left_id[y - 1], lat.interior_id(1, y)});
        for (int x = 1; x < w; ++x)
            lat.edges.push_back({lat.interior_id(x, y), lat.interior_id(x + 1, y)});
        if (wrap_x)
            lat.edges.push_back({lat.interior_id(w, y), lat.interior_id(1, y)});
        else if (lat.right_id[y - 1] >= 0)
            lat.edges.push_back({lat.interior_id(w, y), lat.right_id[y - 1]});
    }
    // Vertical edges, row-major.
    if (!wrap_y)
        for (int x = 1; x <= w; ++x)
            if (lat.bottom_id[x - 1] >= 0)
                lat.edges.push_back({lat.bottom_id[x - 1], lat.interior_id(x, 1)});
    for (int y = 1; y < h; ++y)
        for (int x = 1; x <= w; ++x)
            lat.edges.push_back({lat.interior_id(x, y), lat.interior_id(x, y + 1)});
    if (wrap_y)
        for (int x = 1; x <= w; ++x)
            lat.edges.push_back({lat.interior_id(x, h), lat.interior_id(x, 1)});
    else
        for (int x = 1; x <= w; ++x)
            if (lat.top_id[x - 1] >= 0)
                lat.edges.push_back({lat.interior_id(x, h), lat.top_id[x - 1]});

    // CSR adjacency.
    std::vector<int> deg(lat.n_sites, 0);
    for (const Edge& e : lat.edges) {
        ++deg[e.a];
        ++deg[e.b];
    }
    lat.incident_offset.assign(lat.n_sites + 1, 0);
    for (int s = 0; s < lat.n_sites; ++s) lat.incident_offset[s + 1] = lat.incident_offset[s] + deg[s];
    lat.incident_edge.assign(lat.edges.size() * 2, -1);
    lat.incident_other.assign(lat.edges.size() * 2, -1);
    std::vector<int> fill(lat.n_sites, 0);
    for (int e = 0; e < static_cast<int>(lat.edges.size()); ++e) {
        int a = lat.edges[e].a, b = lat.edges[e].b;
        int pa = lat.incident_offset[a] + fill[a]++;
        lat.incident_edge[pa] = e;
        lat.incident_other[pa] = b;
        int pb = lat.incident_offset[b] + fill[b]++;
        lat.incident_edge[pb] = e;
        lat.incident_other[pb] = a;
    }
    return lat;
}

bool BoundaryCondition::all_fixed_same_sign() const {
    if (spin.empty()) return false;
    for (std::int8_t s : spin)
        if (s != spin[0]) return false;
    return true;
}

BoundaryCondition BoundaryCondition::flipped() const {
    BoundaryCondition out = *this;
    for (auto& s : out.spin) s = static_cast<std::int8_t>(-s);
    out.label = "flip(" + label + ")";
    return out;
}

namespace {

std::string lower_trim(std::string s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

int side_index(const std::string& name) {
    if (name == "bottom") return 0;
    if (name == "top") return 1;
    if (name == "left") return 2;
    if (name == "right") return 3;
    return -1;
}

// Per-side value before site overrides: '+'/'-'/'f'(free)/'p'(periodic), 0 = undecided.
struct ParseState {
    std::array<char, 4> side{0, 0, 0, 0};
    char else_value = 0;
    std::map<std::pair<int, int>, std::int8_t> overrides;
};

[[noreturn]] void bad(const std::string& spec, const std::string& why) {
    throw std::invalid_argument("bad bc-spec \"" + spec + "\": " + why);
}

} // namespace

Box build_box(int r, int r_prime, const std::string& bc_spec) {
    if (r < 1 || r_prime < 1) throw std::invalid_argument("box dimensions must be positive");

    // Tokenize; "site:x,y:v" carries an internal comma, so re-join its pieces.
    std::vector<std::string> raw;
    {
        std::stringstream ss(bc_spec);
        std::string piece;
        while (std::getline(ss, piece, ',')) raw.push_back(lower_trim(piece));
    }
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::string t = raw[i];
        if (t.rfind("site:", 0) == 0 && std::count(t.begin(), t.end(), ':') < 2) {
            if (i + 1 >= raw.size()) bad(bc_spec, "truncated site override");
            t += "," + raw[++i];
        }
        if (!t.empty()) tokens.push_back(t);
    }
    if (tokens.empty()) bad(bc_spec, "empty spec");

    ParseState ps;
    auto set_side = [&](int s, char v) {
        if (ps.side[s] != 0) bad(bc_spec, "side assigned twice");
        ps.side[s] = v;
    };
    for (const std::string& t : tokens) {
        if (t == "free") {
            for (int s = 0; s < 4; ++s) set_side(s, 'f');
            continue;
        }
        if (t == "periodic") {
            for (int s = 0; s < 4; ++s) set_side(s, 'p');
            continue;
        }
        auto colon = t.find(':');
        if (colon == std::string::npos) bad(bc_spec, "token without ':' (" + t + ")");
        std::string head = t.substr(0, colon);
        std::string rest = t.substr(colon + 1);
        if (head == "all" || head == "else") {
            char v = 0;
            if (rest == "+") v = '+';
            else if (rest == "-") v = '-';
            else if (rest == "free" && head == "else") v = 'f';
            else bad(bc_spec, "bad value for " + head);
            if (head == "all")
                for (int s = 0; s < 4; ++s) set_side(s, v);
            else {
                if (ps.else_value != 0) bad(bc_spec, "else given twice");
                ps.else_value = v;
            }
            continue;
        }
        if (head == "site") {
            auto comma = rest.find(',');
            auto colon2 = rest.find(':', comma == std::string::npos ? 0 : comma);
            if (comma == std::string::npos || colon2 == std::string::npos) bad(bc_spec, "bad site override");
            int x = 0, y = 0;
            try {
                x = std::stoi(rest.substr(0, comma));
                y = std::stoi(rest.substr(comma + 1, colon2 - comma - 1));
            } catch (...) {
                bad(bc_spec, "bad site coordinates");
            }
            std::string v = rest.substr(colon2 + 1);
            if (v != "+" && v != "-") bad(bc_spec, "site override value must be + or -");
            ps.overrides[{x, y}] = (v == "+") ? 1 : -1;
            continue;
        }
        int s = side_index(head);
        if (s < 0) bad(bc_spec, "unknown token head " + head);
        char v = 0;
        if (rest == "+") v = '+';
        else if (rest == "-") v = '-';
        else if (rest == "free") v = 'f';
        else if (rest == "periodic") v = 'p';
        else bad(bc_spec, "bad side value " + rest);
        set_side(s, v);
    }
    for (int s = 0; s < 4; ++s)
        if (ps.side[s] == 0) {
            if (ps.else_value == 0) bad(bc_spec, "side left undetermined (use else:/all:)");
            ps.side[s] = ps.else_value;
        }
    bool bp = ps.side[0] == 'p', tp = ps.side[1] == 'p';
    bool lp = ps.side[2] == 'p', rp = ps.side[3] == 'p';
    if (bp != tp || lp != rp) bad(bc_spec, "periodic declared on only one of an opposite-side pair");

    // Candidate boundary sites: bottom, top (x = 1..r), left, right (y = 1..r').
    std::vector<std::uint8_t> exists(2 * r + 2 * r_prime, 0);
    std::vector<std::int8_t> value(2 * r + 2 * r_prime, 0);
    auto slot_of = [&](int x, int y) -> int {
        if (y == 0 && x >= 1 && x <= r) return x - 1;
        if (y == r_prime + 1 && x >= 1 && x <= r) return r + x - 1;
        if (x == 0 && y >= 1 && y <= r_prime) return 2 * r + y - 1;
        if (x == r + 1 && y >= 1 && y <= r_prime) return 2 * r + r_prime + y - 1;
        return -1;
    };
    auto side_of_slot = [&](int slot) -> int {
        if (slot < r) return 0;
        if (slot < 2 * r) return 1;
        if (slot < 2 * r + r_prime) return 2;
        return 3;
    };
    for (int slot = 0; slot < 2 * r + 2 * r_prime; ++slot) {
        char v = ps.side[side_of_slot(slot)];
        if (v == '+' || v == '-') {
            exists[slot] = 1;
            value[slot] = (v == '+') ? 1 : -1;
        }
    }
    for (const auto& [xy, v] : ps.overrides) {
        int slot = slot_of(xy.first, xy.second);
        if (slot < 0) bad(bc_spec, "site override is not a boundary position");
        if (ps.side[side_of_slot(slot)] == 'p') bad(bc_spec, "site override on a periodic side");
        exists[slot] = 1;
        value[slot] = v;
    }

    Box box;
    box.lat = Lattice::build(r, r_prime, lp, bp, exists);
    auto kind_of = [](char c) {
        if (c == 'f') return SideKind::free;
        if (c == 'p') return SideKind::periodic;
        return SideKind::fixed;
    };
    for (int s = 0; s < 4; ++s) box.bc.side_kind[s] = kind_of(ps.side[s]);
    box.bc.spin.reserve(box.lat.n_sites - box.lat.n_interior);
    for (int site = box.lat.n_interior; site < box.lat.n_sites; ++site) {
        Coord c = box.lat.coords[site];
        int slot = slot_of(c.x, c.y);
        box.bc.spin.push_back(value[slot]);
    }
    {
        // Normalized label.
        // Semicolon-separated so the label stays a single CSV field.
        static const char* names[4] = {"bottom", "top", "left", "right"};
        std::string lbl;
        for (int s = 0; s < 4; ++s) {
            if (s) lbl += ";";
            lbl += names[s];
            lbl += ":";
            lbl += (ps.side[s] == 'f') ? "free" : (ps.side[s] == 'p') ? "periodic" : std::string(1, ps.side[s]);
        }
        for (const auto& [xy, v] : ps.overrides)
            lbl += ";site:" + std::to_string(xy.first) + "." + std::to_string(xy.second) + ":" + (v > 0 ? "+" : "-");
        box.bc.label = lbl;
    }
    return box;
}

std::vector<Neighbor> neighbors(const Lattice& lat, const BoundaryCondition&, int x, int y) {
    if (!lat.in_interior(x, y)) throw std::out_of_range("neighbors: site outside the interior");
    const int dx[4] = {-1, 1, 0, 0};
    const int dy[4] = {0, 0, -1, 1};
    std::vector<Neighbor> out;
    out.reserve(4);
    for (int d = 0; d < 4; ++d) {
        int nx = x + dx[d], ny = y + dy[d];
        if (lat.wrap_x) {
            if (nx == 0) nx = lat.width;
            else if (nx == lat.width + 1) nx = 1;
        }
        if (lat.wrap_y) {
            if (ny == 0) ny = lat.height;
            else if (ny == lat.height + 1) ny = 1;
        }
        int s = lat.site_at(nx, ny);
        if (s < 0) out.push_back({-1, NeighborKind::absent});
        else out.push_back({s, lat.is_interior(s) ? NeighborKind::interior : NeighborKind::boundary});
    }
    return out;
}

BoundaryPartition boundary_partition(const Lattice& lat, const BoundaryCondition& bc) {
    BoundaryPartition part;
    for (int site = lat.n_interior; site < lat.n_sites; ++site) {
        if (bc.boundary_spin(lat, site) > 0) part.plus.push_back(site);
        else part.minus.push_back(site);
    }
    for (int s = 0; s < 4; ++s)
        if (bc.side_kind[s] == SideKind::free) part.free_sides.push_back(s);
    return part;
}

} // namespace isinglab
