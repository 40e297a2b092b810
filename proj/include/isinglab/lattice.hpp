#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace isinglab {

enum class Side : int { bottom = 0, top = 1, left = 2, right = 3 };
enum class SideKind : int { fixed, free, periodic };
enum class NeighborKind : int { interior, boundary, absent };

struct Coord {
    int x = 0;
    int y = 0;
    bool operator==(const Coord&) const = default;
};

struct Edge {
    int a = -1;
    int b = -1;
};

// Rectangle [1,w] x [1,h] of interior sites plus the existing boundary ring
// sites. Interior sites are indexed row-major from (1,1); boundary sites
// follow (bottom, top, left, right order). Corners of the bounding rectangle
// are never sites: they neighbor no interior site. Edge indices enumerate
// horizontal edges first, then vertical, each row-major, so the order is a
// stable global order usable for exposure and randomness addressing.
class Lattice {
  public:
    int width = 0;
    int height = 0;
    bool wrap_x = false;
    bool wrap_y = false;

    int n_interior = 0;
    int n_sites = 0; // interior + existing boundary sites

    std::vector<Coord> coords;        // per site id
    std::vector<Edge> edges;          // global edge order
    std::vector<int> incident_offset; // CSR adjacency over all sites
    std::vector<int> incident_edge;
    std::vector<int> incident_other;

    int interior_id(int x, int y) const { return (y - 1) * width + (x - 1); }
    bool is_interior(int site) const { return site < n_interior; }
    bool in_interior(int x, int y) const { return x >= 1 && x <= width && y >= 1 && y <= height; }

    // Site id at coordinate, or -1 when no site exists there.
    int site_at(int x, int y) const;

    int degree(int site) const { return incident_offset[site + 1] - incident_offset[site]; }

    // boundary_exists_mask enumerates candidate ring positions in the fixed
    // order bottom x=1..w, top x=1..w, left y=1..h, right y=1..h.
    static Lattice build(int w, int h, bool wrap_x, bool wrap_y,
                         const std::vector<std::uint8_t>& boundary_exists_mask);

    std::vector<int> bottom_id, top_id; // size width, -1 where absent
    std::vector<int> left_id, right_id; // size height
};

// Per-site boundary values aligned with the lattice's boundary site ids.
class BoundaryCondition {
  public:
    std::array<SideKind, 4> side_kind{SideKind::free, SideKind::free, SideKind::free, SideKind::free};
    std::vector<std::int8_t> spin; // indexed by (site - n_interior), +1 or -1
    std::string label;             // normalized spec string

    int8_t boundary_spin(const Lattice& lat, int site) const { return spin[site - lat.n_interior]; }

    bool all_fixed_same_sign() const;
    bool has_boundary_sites() const { return !spin.empty(); }

    // Sitewise flip of all fixed boundary spins.
    BoundaryCondition flipped() const;
};

struct Box {
    Lattice lat;
    BoundaryCondition bc;
};

// Build the lattice and boundary condition from a bc-spec string.
//
// Grammar (comma separated, case insensitive):
//   all:(+|-) | free | periodic | <side>:(+|-|free|periodic) | else:(+|-|free)
//   | site:<x>,<y>:(+|-)
// with side in {top,bottom,left,right}. Periodic sides must come in
// opposite-side pairs; every side must end up determined. Site overrides are
// applied after side defaults and must name a boundary position of a
// non-periodic side.
Box build_box(int r, int r_prime, const std::string& bc_spec);

struct Neighbor {
    int site = -1; // -1 when absent
    NeighborKind kind = NeighborKind::absent;
};

// Up to four entries in (left, right, down, up) direction order. Free or
// nonexistent boundary directions give `absent`; periodic wraps.
std::vector<Neighbor> neighbors(const Lattice& lat, const BoundaryCondition& bc, int x, int y);

struct BoundaryPartition {
    std::vector<int> plus;  // P(xi)
    std::vector<int> minus; // M(xi)
    std::vector<int> free_sides; // sides (as int) that carry no sites
};

BoundaryPartition boundary_partition(const Lattice& lat, const BoundaryCondition& bc);

} // namespace isinglab
