#include "isinglab/ising.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

std::uint32_t mask_of(const SpinConfig& c) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < c.s.size(); ++i)
        if (c.s[i] > 0) m |= (1u << i);
    return m;
}

SpinConfig spins_from_mask(const Lattice& lat, std::uint32_t mask) {
    SpinConfig c;
    c.s.resize(lat.n_interior);
    for (int i = 0; i < lat.n_interior; ++i) c.s[i] = (mask >> i) & 1u ? 1 : -1;
    return c;
}

int interaction_sum(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma) {
    if (static_cast<int>(sigma.s.size()) != lat.n_interior)
        throw std::invalid_argument("interaction_sum: spin config does not cover the interior");
    int sum = 0;
    for (const Edge& e : lat.edges) {
        int sa = lat.is_interior(e.a) ? sigma.s[e.a] : bc.boundary_spin(lat, e.a);
        int sb = lat.is_interior(e.b) ? sigma.s[e.b] : bc.boundary_spin(lat, e.b);
        sum += sa * sb;
    }
    return sum;
}

int magnetization(const SpinConfig& sigma) {
    int m = 0;
    for (std::int8_t v : sigma.s) m += v;
    return m;
}

ExactDistribution gibbs_exact(const Lattice& lat, const BoundaryCondition& bc, double beta) {
    const int n = lat.n_interior;
    if (n > 24) throw std::invalid_argument("gibbs_exact: more than 24 sites");

    // Interior-interior pairs and per-site boundary fields.
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> field(n, 0);
    for (const Edge& e : lat.edges) {
        bool ia = lat.is_interior(e.a), ib = lat.is_interior(e.b);
        if (ia && ib) pairs.emplace_back(e.a, e.b);
        else if (ia) field[e.a] += bc.boundary_spin(lat, e.b);
        else field[e.b] += bc.boundary_spin(lat, e.a);
    }

    const std::size_t total = std::size_t{1} << n;
    ExactDistribution dist;
    dist.p.assign(total, 0.0);

    // Gray-code walk with an incremental interaction sum.
    std::vector<std::int8_t> s(n, -1);
    int sum = 0;
    for (const auto& [a, b] : pairs) sum += s[a] * s[b];
    for (int i = 0; i < n; ++i) sum += s[i] * field[i];

    double z = 0.0;
    std::uint32_t gray = 0;
    for (std::size_t k = 0;; ++k) {
        double w = std::exp(beta * sum);
        dist.p[gray] += w;
        z += w;
        if (k + 1 == total) break;
        int bit = __builtin_ctzll(k + 1);
        std::uint32_t new_gray = gray ^ (1u << bit);
        // Flip site `bit`: recompute its local contribution.
        int nb = 0;
        for (int idx = lat.incident_offset[bit]; idx < lat.incident_offset[bit + 1]; ++idx) {
            int other = lat.incident_other[idx];
            if (lat.is_interior(other)) nb += s[other];
        }
        sum -= 2 * s[bit] * (nb + field[bit]);
        s[bit] = static_cast<std::int8_t>(-s[bit]);
        gray = new_gray;
    }
    for (double& v : dist.p) v /= z;
    return dist;
}

double tv_distance(const ExactDistribution& a, const ExactDistribution& b) {
    if (a.p.size() != b.p.size()) throw std::invalid_argument("tv_distance: mismatched supports");
    double s = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) s += std::fabs(a.p[i] - b.p[i]);
    return 0.5 * s;
}

std::string to_snapshot(const Lattice& lat, const SpinConfig& sigma) {
    std::string out;
    for (int y = lat.height; y >= 1; --y) {
        for (int x = 1; x <= lat.width; ++x)
            out.push_back(sigma.s[lat.interior_id(x, y)] > 0 ? '+' : '-');
        out.push_back('\n');
    }
    return out;
}

SpinConfig from_snapshot(const Lattice& lat, const std::string& text) {
    SpinConfig c;
    c.s.assign(lat.n_interior, 0);
    int y = lat.height, x = 1;
    for (char ch : text) {
        if (ch == '\n') {
            if (x != lat.width + 1) throw std::invalid_argument("snapshot: short row");
            --y;
            x = 1;
            continue;
        }
        if (ch != '+' && ch != '-') throw std::invalid_argument("snapshot: bad character");
        if (y < 1 || x > lat.width) throw std::invalid_argument("snapshot: too many rows/columns");
        c.s[lat.interior_id(x, y)] = (ch == '+') ? 1 : -1;
        ++x;
    }
    if (y != 0) throw std::invalid_argument("snapshot: wrong number of rows");
    return c;
}

std::vector<double> row_marginal_exact(const Lattice& lat, const BoundaryCondition& bc, double beta,
                                       int y_from) {
    if (lat.wrap_y) throw std::invalid_argument("row_marginal_exact: vertical wrap unsupported");
    const int w = lat.width, h = lat.height;
    if (w > 16) throw std::invalid_argument("row_marginal_exact: width too large");
    if (y_from < 1 || y_from > h) throw std::invalid_argument("row_marginal_exact: bad row");
    const int block_rows = h - y_from + 1;
    if (w * block_rows > 24) throw std::invalid_argument("row_marginal_exact: marginal too large");

    const int nrow = 1 << w;
    auto spin = [](std::uint32_t m, int x) { return ((m >> x) & 1u) ? 1 : -1; };

    // Integer interaction content of a single row (horizontal + side fields +
    // bottom/top fields where applicable).
    std::vector<int> left_field(h + 1, 0), right_field(h + 1, 0);
    std::vector<int> bottom_field(w, 0), top_field(w, 0);
    for (int y = 1; y <= h; ++y) {
        if (lat.left_id[y - 1] >= 0) left_field[y] = bc.boundary_spin(lat, lat.left_id[y - 1]);
        if (lat.right_id[y - 1] >= 0) right_field[y] = bc.boundary_spin(lat, lat.right_id[y - 1]);
    }
    for (int x = 0; x < w; ++x) {
        if (lat.bottom_id[x] >= 0) bottom_field[x] = bc.boundary_spin(lat, lat.bottom_id[x]);
        if (lat.top_id[x] >= 0) top_field[x] = bc.boundary_spin(lat, lat.top_id[x]);
    }
    auto row_sum = [&](int y, std::uint32_t m) {
        int s = 0;
        for (int x = 0; x + 1 < w; ++x) s += spin(m, x) * spin(m, x + 1);
        if (lat.wrap_x) s += spin(m, w - 1) * spin(m, 0);
        s += left_field[y] * spin(m, 0) + right_field[y] * spin(m, w - 1);
        if (y == 1)
            for (int x = 0; x < w; ++x) s += bottom_field[x] * spin(m, x);
        if (y == h)
            for (int x = 0; x < w; ++x) s += top_field[x] * spin(m, x);
        return s;
    };
    auto cross_sum = [&](std::uint32_t a, std::uint32_t b) {
        int s = 0;
        for (int x = 0; x < w; ++x) s += spin(a, x) * spin(b, x);
        return s;
    };

    // Forward pass over rows 1..y_from-1.
    std::vector<double> fwd(nrow, 1.0);
    bool have_fwd = false;
    for (int y = 1; y < y_from; ++y) {
        std::vector<double> nxt(nrow, 0.0);
        for (int b = 0; b < nrow; ++b) {
            double wrow = std::exp(beta * row_sum(y, static_cast<std::uint32_t>(b)));
            if (!have_fwd) {
                nxt[b] = wrow;
            } else {
                double acc = 0.0;
                for (int a = 0; a < nrow; ++a)
                    acc += fwd[a] * std::exp(beta * cross_sum(static_cast<std::uint32_t>(a),
                                                              static_cast<std::uint32_t>(b)));
                nxt[b] = acc * wrow;
            }
        }
        fwd = std::move(nxt);
        have_fwd = true;
    }
    // Weight arriving at the first block row as a function of that row's mask.
    std::vector<double> gate(nrow, 1.0);
    if (have_fwd)
        for (int b = 0; b < nrow; ++b) {
            double acc = 0.0;
            for (int a = 0; a < nrow; ++a)
                acc += fwd[a] *
                       std::exp(beta * cross_sum(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)));
            gate[b] = acc;
        }

    // Enumerate the block exactly.
    const std::size_t total = std::size_t{1} << (w * block_rows);
    std::vector<double> out(total, 0.0);
    double z = 0.0;
    for (std::size_t m = 0; m < total; ++m) {
        int s = 0;
        std::uint32_t prev = 0;
        for (int j = 0; j < block_rows; ++j) {
            std::uint32_t rowm = (m >> (w * j)) & (nrow - 1);
            s += row_sum(y_from + j, rowm);
            if (j > 0) s += cross_sum(prev, rowm);
            prev = rowm;
        }
        double wgt = gate[m & (nrow - 1)] * std::exp(beta * s);
        out[m] = wgt;
        z += wgt;
    }
    for (double& v : out) v /= z;
    return out;
}

} // namespace isinglab
