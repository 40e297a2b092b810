#include "isinglab/cftp.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

CftpResult cftp_sample(const Lattice& lat, const BoundaryCondition& bc, double beta,
                       const RandomSource& rng, RateKind kind, const CftpOptions& opt) {
    if (kind != RateKind::heat_bath)
        throw std::invalid_argument(
            "cftp_sample: only heat-bath updates are monotone under the shared-variable coupling");
    const int n = lat.n_interior;

    // P(new spin = +1 | neighbor sum S), increasing in S; the shared-U update
    // sigma(x) <- 1{U < p_plus(S)} preserves sitewise order.
    double p_plus[9];
    for (int s = -4; s <= 4; ++s) p_plus[s + 4] = 1.0 / (1.0 + std::exp(-2.0 * beta * s));

    // Per-site boundary field and interior adjacency.
    std::vector<int> field(n, 0);
    std::vector<std::vector<int>> nbr(n);
    for (const Edge& e : lat.edges) {
        bool ia = lat.is_interior(e.a), ib = lat.is_interior(e.b);
        if (ia && ib) {
            nbr[e.a].push_back(e.b);
            nbr[e.b].push_back(e.a);
        } else if (ia) {
            field[e.a] += bc.boundary_spin(lat, e.b);
        } else {
            field[e.b] += bc.boundary_spin(lat, e.a);
        }
    }

    CftpResult res;
    std::vector<std::int8_t> top(n), bot(n);
    for (std::uint64_t epoch_sweeps = 1;; epoch_sweeps *= 2) {
        ++res.epochs;
        std::fill(top.begin(), top.end(), std::int8_t{1});
        std::fill(bot.begin(), bot.end(), std::int8_t{-1});
        // Sweeps at absolute times -epoch_sweeps .. -1.
        for (std::uint64_t t = epoch_sweeps; t >= 1; --t) {
            for (int x = 0; x < n; ++x) {
                double u = rng.u(Purpose::cftp_update, static_cast<std::uint64_t>(x), t);
                int st = field[x], sb = field[x];
                for (int y : nbr[x]) {
                    st += top[y];
                    sb += bot[y];
                }
                top[x] = u < p_plus[st + 4] ? 1 : -1;
                bot[x] = u < p_plus[sb + 4] ? 1 : -1;
            }
            res.updates += static_cast<std::uint64_t>(2 * n);
            if (opt.audit_order)
                for (int x = 0; x < n; ++x)
                    if (top[x] < bot[x]) res.order_ok = false;
        }
        if (top == bot) {
            res.sample.s = top;
            res.sweeps_to_coalesce = static_cast<double>(epoch_sweeps);
            return res;
        }
        if (res.updates > opt.update_budget)
            throw std::runtime_error("cftp_sample: update budget exhausted before coalescence");
    }
}

double mixing_time_bound(double gap, double mu_min) {
    if (gap <= 0.0 || mu_min <= 0.0 || mu_min > 1.0)
        throw std::invalid_argument("mixing_time_bound: need gap > 0 and mu_min in (0,1]");
    return std::log(std::exp(1.0) / mu_min) / gap;
}

} // namespace isinglab
