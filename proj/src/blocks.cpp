#include "isinglab/blocks.hpp"

#include "isinglab/cftp.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

namespace {

long long integer_sqrt(long long v) {
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

} // namespace

BlockPair make_blocks(int r, int r_prime, int ell) {
    if (r < 1 || r_prime < r) throw std::invalid_argument("make_blocks: need r' >= r >= 1");
    long long rr = static_cast<long long>(r) * r_prime;
    long long k = integer_sqrt(rr);
    // Largest admissible shift: floor(sqrt(r'/r)).
    int ell_max = 1;
    while (static_cast<long long>(ell_max + 1) * (ell_max + 1) * r <= r_prime) ++ell_max;
    if (ell < 1 || ell > ell_max) throw std::invalid_argument("make_blocks: shift out of range");

    BlockPair bp;
    bp.ell = ell;
    if (k * k == rr) {
        long long a1 = r_prime + static_cast<long long>(ell - 1) * k; // 3*x1
        long long a2 = r_prime + static_cast<long long>(ell) * k;     // 3*x2
        bp.lo1 = static_cast<int>((a1 + 2) / 3);
        bp.hi2 = static_cast<int>(a2 / 3);
    } else {
        double s = std::sqrt(static_cast<double>(rr));
        double x1 = (r_prime + (ell - 1) * s) / 3.0;
        double x2 = (r_prime + ell * s) / 3.0;
        bp.lo1 = static_cast<int>(std::ceil(x1 - 1e-9));
        bp.hi2 = static_cast<int>(std::floor(x2 + 1e-9));
    }
    bp.lo1 = std::max(1, bp.lo1);
    bp.hi2 = std::min(r_prime, bp.hi2);
    if (bp.lo1 > bp.hi2 + 1) throw std::logic_error("make_blocks: blocks do not cover the box");
    return bp;
}

namespace {

// Sub-box of full width over rows [y1,y2] with the boundary induced by the
// surrounding spins and the original boundary condition.
Box make_row_block_box(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma,
                       int y1, int y2) {
    if (lat.wrap_y) throw std::invalid_argument("block_update: vertical wrap unsupported");
    if (y1 < 1 || y2 > lat.height || y1 > y2) throw std::invalid_argument("block_update: bad row range");
    const int w = lat.width;
    const int hb = y2 - y1 + 1;

    std::vector<std::uint8_t> exists(2 * w + 2 * hb, 0);
    std::vector<std::int8_t> value(2 * w + 2 * hb, 0);
    // bottom of the block
    for (int x = 1; x <= w; ++x) {
        int slot = x - 1;
        if (y1 == 1) {
            if (lat.bottom_id[x - 1] >= 0) {
                exists[slot] = 1;
                value[slot] = bc.boundary_spin(lat, lat.bottom_id[x - 1]);
            }
        } else {
            exists[slot] = 1;
            value[slot] = sigma.s[lat.interior_id(x, y1 - 1)];
        }
    }
    // top of the block
    for (int x = 1; x <= w; ++x) {
        int slot = w + x - 1;
        if (y2 == lat.height) {
            if (lat.top_id[x - 1] >= 0) {
                exists[slot] = 1;
                value[slot] = bc.boundary_spin(lat, lat.top_id[x - 1]);
            }
        } else {
            exists[slot] = 1;
            value[slot] = sigma.s[lat.interior_id(x, y2 + 1)];
        }
    }
    // left/right inherit the lattice sides over the block rows
    for (int yy = 1; yy <= hb; ++yy) {
        int y = y1 + yy - 1;
        if (!lat.wrap_x) {
            if (lat.left_id[y - 1] >= 0) {
                exists[2 * w + yy - 1] = 1;
                value[2 * w + yy - 1] = bc.boundary_spin(lat, lat.left_id[y - 1]);
            }
            if (lat.right_id[y - 1] >= 0) {
                exists[2 * w + hb + yy - 1] = 1;
                value[2 * w + hb + yy - 1] = bc.boundary_spin(lat, lat.right_id[y - 1]);
            }
        }
    }
    Box box;
    box.lat = Lattice::build(w, hb, lat.wrap_x, false, exists);
    for (int s = 0; s < 4; ++s) box.bc.side_kind[s] = SideKind::fixed;
    if (lat.wrap_x) {
        box.bc.side_kind[static_cast<int>(Side::left)] = SideKind::periodic;
        box.bc.side_kind[static_cast<int>(Side::right)] = SideKind::periodic;
    }
    box.bc.spin.reserve(box.lat.n_sites - box.lat.n_interior);
    for (int site = box.lat.n_interior; site < box.lat.n_sites; ++site) {
        Coord c = box.lat.coords[site];
        int slot;
        if (c.y == 0) slot = c.x - 1;
        else if (c.y == hb + 1) slot = w + c.x - 1;
        else if (c.x == 0) slot = 2 * w + c.y - 1;
        else slot = 2 * w + hb + c.y - 1;
        box.bc.spin.push_back(value[slot]);
    }
    box.bc.label = "block-induced";
    return box;
}

} // namespace

void block_update(const Lattice& lat, const BoundaryCondition& bc, double beta, SpinConfig& sigma,
                  int y1, int y2, const RandomSource& rng, std::uint64_t epoch) {
    Box sub = make_row_block_box(lat, bc, sigma, y1, y2);
    CftpResult res = cftp_sample(sub.lat, sub.bc, beta, rng.fork(0x6b7f'0000 ^ epoch));
    for (int y = y1; y <= y2; ++y)
        for (int x = 1; x <= lat.width; ++x)
            sigma.s[lat.interior_id(x, y)] = res.sample.s[sub.lat.interior_id(x, y - y1 + 1)];
}

BlockCouplingEstimate block_coupling_probability(const Lattice& lat, const BoundaryCondition& bc,
                                                 double beta, int ell, long samples,
                                                 const RandomSource& rng) {
    BlockPair bp = make_blocks(lat.width, lat.height, ell);
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
        SpinConfig x = SpinConfig::constant(lat, 1);
        SpinConfig y = SpinConfig::constant(lat, -1);
        std::uint64_t e0 = 2 * static_cast<std::uint64_t>(s);
        std::uint64_t e1 = e0 + 1;
        block_update(lat, bc, beta, x, bp.lo1, lat.height, rng, e0);
        block_update(lat, bc, beta, y, bp.lo1, lat.height, rng, e0);
        block_update(lat, bc, beta, x, 1, bp.hi2, rng, e1);
        block_update(lat, bc, beta, y, 1, bp.hi2, rng, e1);
        if (x.s == y.s) ++hits;
    }
    BlockCouplingEstimate est;
    est.samples = samples;
    est.probability = static_cast<double>(hits) / samples;
    est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / samples);
    return est;
}

double exponent_from_crossing(double p_plus) {
    if (!(p_plus > 0.0 && p_plus < 1.0))
        throw std::invalid_argument("exponent_from_crossing: p_plus must lie in (0,1)");
    return 2.0 * std::log(2.0 / (1.0 - p_plus)) / std::log(1.5);
}

} // namespace isinglab
