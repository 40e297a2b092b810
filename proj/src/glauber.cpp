#include "isinglab/glauber.hpp"

#include <cmath>
#include <stdexcept>

namespace isinglab {

RateFamily RateFamily::make(RateKind kind, double beta) {
    RateFamily fam;
    fam.kind = kind;
    fam.beta = beta;
    for (int sgn = 0; sgn < 2; ++sgn) {
        int spin = sgn ? 1 : -1;
        for (int s = -4; s <= 4; ++s) {
            double a = 2.0 * beta * spin * s;
            double r = (kind == RateKind::heat_bath) ? 1.0 / (1.0 + std::exp(a))
                                                     : std::min(1.0, std::exp(-a));
            fam.table[sgn][s + 4] = r;
        }
    }
    return fam;
}

int neighbor_sum(const Lattice& lat, const BoundaryCondition& bc, const SpinConfig& sigma, int site) {
    int s = 0;
    for (int idx = lat.incident_offset[site]; idx < lat.incident_offset[site + 1]; ++idx) {
        int other = lat.incident_other[idx];
        s += lat.is_interior(other) ? sigma.s[other] : bc.boundary_spin(lat, other);
    }
    return s;
}

double flip_rate(const RateFamily& fam, const Lattice& lat, const BoundaryCondition& bc,
                 const SpinConfig& sigma, int site) {
    return fam.rate(sigma.s[site], neighbor_sum(lat, bc, sigma, site));
}

void random_scan_step(ChainState& state, const RateFamily& fam, const Lattice& lat,
                      const BoundaryCondition& bc, RandomSource& rng) {
    const int n = lat.n_interior;
    int site = static_cast<int>(rng.next_below(n));
    double r = flip_rate(fam, lat, bc, state.sigma, site);
    if (rng.next() < r) state.sigma.s[site] = static_cast<std::int8_t>(-state.sigma.s[site]);
    state.sweeps += 1.0 / n;
}

Mat generator_matrix(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam) {
    const int n = lat.n_interior;
    if (n > 12) throw std::invalid_argument("generator_matrix: more than 12 sites");
    const int states = 1 << n;
    Mat L(states);
    for (int m = 0; m < states; ++m) {
        SpinConfig sigma = spins_from_mask(lat, static_cast<std::uint32_t>(m));
        double out = 0.0;
        for (int x = 0; x < n; ++x) {
            double c = flip_rate(fam, lat, bc, sigma, x);
            L(m, m ^ (1 << x)) = c;
            out += c;
        }
        L(m, m) = -out;
    }
    return L;
}

std::vector<double> stationary_vector(const Mat& generator) {
    const int s = generator.n;
    Mat a(s);
    std::vector<double> b(s, 0.0);
    // pi L = 0 with sum(pi) = 1; replace the last equation by normalization.
    for (int col = 0; col < s; ++col)
        for (int row = 0; row < s; ++row) a(col, row) = generator(row, col);
    for (int row = 0; row < s; ++row) a(s - 1, row) = 1.0;
    b[s - 1] = 1.0;
    return solve_linear(std::move(a), std::move(b));
}

namespace {

Mat symmetrized_neg_generator(const Mat& L, const std::vector<double>& mu) {
    const int s = L.n;
    Mat m(s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            double v = -L(i, j);
            if (i != j) v *= std::sqrt(mu[i] / mu[j]);
            m(i, j) = v;
        }
    // Symmetrize exactly against roundoff.
    for (int i = 0; i < s; ++i)
        for (int j = i + 1; j < s; ++j) {
            double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = v;
        }
    return m;
}

} // namespace

double exact_generator_gap(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam) {
    Mat L = generator_matrix(lat, bc, fam);
    ExactDistribution mu = gibbs_exact(lat, bc, fam.beta);
    Mat sym = symmetrized_neg_generator(L, mu.p);
    std::vector<double> ev = jacobi_eigenvalues(std::move(sym));
    return ev.at(1);
}

double dirichlet_form(const std::vector<double>& f, const ExactDistribution& mu,
                      const RateFamily& fam, const Lattice& lat, const BoundaryCondition& bc) {
    const int n = lat.n_interior;
    const std::size_t states = std::size_t{1} << n;
    if (f.size() != states || mu.p.size() != states)
        throw std::invalid_argument("dirichlet_form: size mismatch");
    double e = 0.0;
    for (std::size_t m = 0; m < states; ++m) {
        SpinConfig sigma = spins_from_mask(lat, static_cast<std::uint32_t>(m));
        for (int x = 0; x < n; ++x) {
            double c = flip_rate(fam, lat, bc, sigma, x);
            double d = f[m ^ (std::size_t{1} << x)] - f[m];
            e += 0.5 * mu.p[m] * c * d * d;
        }
    }
    return e;
}

double variance_under(const std::vector<double>& f, const ExactDistribution& mu) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        mean += mu.p[i] * f[i];
        sq += mu.p[i] * f[i] * f[i];
    }
    return sq - mean * mean;
}

double dirichlet_gap_infimum(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam,
                             const ExactDistribution& mu) {
    const int n = lat.n_interior;
    const int states = 1 << n;
    // Quadratic form of E(f) assembled term by term from its definition.
    Mat a(states);
    for (int m = 0; m < states; ++m) {
        SpinConfig sigma = spins_from_mask(lat, static_cast<std::uint32_t>(m));
        for (int x = 0; x < n; ++x) {
            int mx = m ^ (1 << x);
            double hw = 0.5 * mu.p[m] * flip_rate(fam, lat, bc, sigma, x);
            a(m, m) += hw;
            a(mx, mx) += hw;
            a(m, mx) -= hw;
            a(mx, m) -= hw;
        }
    }
    // Var(f) = |D^{1/2} f|^2 - <sqrt(mu), D^{1/2} f>^2; work in g = D^{1/2} f
    // restricted to the orthogonal complement of sqrt(mu), where the problem
    // becomes an ordinary symmetric eigenproblem.
    std::vector<double> root(states);
    for (int i = 0; i < states; ++i) root[i] = std::sqrt(mu.p[i]);
    Mat ap(states);
    for (int i = 0; i < states; ++i)
        for (int j = 0; j < states; ++j) ap(i, j) = a(i, j) / (root[i] * root[j]);
    // Householder vector sending sqrt(mu) to e_0.
    std::vector<double> v(root);
    v[0] -= 1.0; // |sqrt(mu)| = 1
    double vn = 0.0;
    for (double x : v) vn += x * x;
    Mat m2(states - 1);
    if (vn < 1e-28) {
        for (int i = 1; i < states; ++i)
            for (int j = 1; j < states; ++j) m2(i - 1, j - 1) = ap(i, j);
    } else {
        // H = I - 2 v v^T / |v|^2; basis of the complement = rows 1.. of H.
        std::vector<double> hv(states);
        Mat h(states);
        for (int i = 0; i < states; ++i)
            for (int j = 0; j < states; ++j) h(i, j) = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * v[j] / vn;
        // m2 = H_rest * ap * H_rest^T
        Mat tmp(states);
        for (int i = 0; i < states; ++i)
            for (int j = 0; j < states; ++j) {
                double s = 0.0;
                for (int k = 0; k < states; ++k) s += h(i, k) * ap(k, j);
                tmp(i, j) = s;
            }
        for (int i = 1; i < states; ++i)
            for (int j = 1; j < states; ++j) {
                double s = 0.0;
                for (int k = 0; k < states; ++k) s += tmp(i, k) * h(j, k);
                m2(i - 1, j - 1) = s;
            }
    }
    std::vector<double> ev = jacobi_eigenvalues(std::move(m2));
    return ev.at(0);
}

double worst_case_tv(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam, double t) {
    Mat L = generator_matrix(lat, bc, fam);
    ExactDistribution mu = gibbs_exact(lat, bc, fam.beta);
    Mat sym = symmetrized_neg_generator(L, mu.p);
    Mat vecs;
    std::vector<double> ev = jacobi_eigenvalues(std::move(sym), &vecs);
    const int s = L.n;
    double worst = 0.0;
    for (int a = 0; a < s; ++a) {
        double tv = 0.0;
        for (int b = 0; b < s; ++b) {
            double pab = 0.0;
            for (int k = 0; k < s; ++k) pab += vecs(a, k) * vecs(b, k) * std::exp(-ev[k] * t);
            pab *= std::sqrt(mu.p[b] / mu.p[a]);
            tv += std::fabs(pab - mu.p[b]);
        }
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

double exact_tmix(const Lattice& lat, const BoundaryCondition& bc, const RateFamily& fam, double dt,
                  double t_max) {
    Mat L = generator_matrix(lat, bc, fam);
    ExactDistribution mu = gibbs_exact(lat, bc, fam.beta);
    Mat sym = symmetrized_neg_generator(L, mu.p);
    Mat vecs;
    std::vector<double> ev = jacobi_eigenvalues(std::move(sym), &vecs);
    const int s = L.n;
    const double target = std::exp(-1.0);
    for (double t = dt; t <= t_max; t += dt) {
        double worst = 0.0;
        for (int a = 0; a < s && worst <= target; ++a) {
            double tv = 0.0;
            for (int b = 0; b < s; ++b) {
                double pab = 0.0;
                for (int k = 0; k < s; ++k) pab += vecs(a, k) * vecs(b, k) * std::exp(-ev[k] * t);
                pab *= std::sqrt(mu.p[b] / mu.p[a]);
                tv += std::fabs(pab - mu.p[b]);
            }
            worst = std::max(worst, 0.5 * tv);
        }
        if (worst <= target) return t;
    }
    throw std::runtime_error("exact_tmix: did not mix before t_max");
}

std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag) {
    const int n = static_cast<int>(series.size());
    if (n < 2 || max_lag >= n) throw std::invalid_argument("autocorrelation: series too short");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= n;
    std::vector<double> c(max_lag + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (int i = 0; i + k < n; ++i) s += (series[i] - mean) * (series[i + k] - mean);
        c[k] = s / (n - k);
    }
    return c;
}

DecayFit autocorr_gap_estimate(const std::vector<double>& series, double dt) {
    if (series.size() < 1000) throw std::invalid_argument("autocorr_gap_estimate: series too short");
    int max_lag = static_cast<int>(std::min<std::size_t>(series.size() / 10, 4096));
    std::vector<double> c = autocorrelation(series, max_lag);
    if (c[0] < 1e-12) throw std::runtime_error("autocorr_gap_estimate: constant series");
    std::vector<double> xs, ys;
    for (int k = 1; k <= max_lag; ++k) {
        double rho = c[k] / c[0];
        if (rho < 0.05) break;
        xs.push_back(k * dt);
        ys.push_back(std::log(rho));
    }
    if (xs.size() < 3) throw std::runtime_error("autocorr_gap_estimate: non-decaying or degenerate window");
    std::vector<double> sig(xs.size(), 1.0);
    LineFit fit = weighted_line_fit(xs, ys, sig);
    if (fit.slope >= 0.0) throw std::runtime_error("autocorr_gap_estimate: non-decaying autocorrelation");
    // Rescale the per-point error from residuals.
    double resid = fit.chi2 / std::max<std::size_t>(1, xs.size() - 2);
    DecayFit out;
    out.rate = -fit.slope;
    out.se = fit.slope_se * std::sqrt(std::max(resid, 1e-30));
    out.points = static_cast<int>(xs.size());
    return out;
}

DecayFit autocorr_power_fit(const std::vector<double>& corr, const std::vector<double>& times) {
    if (corr.size() != times.size() || corr.size() < 3)
        throw std::invalid_argument("autocorr_power_fit: need >= 3 points");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < corr.size(); ++i) {
        if (corr[i] <= 0.0 || times[i] <= 0.0) continue;
        xs.push_back(std::log(times[i]));
        ys.push_back(std::log(corr[i]));
    }
    if (xs.size() < 3) throw std::runtime_error("autocorr_power_fit: window underpopulated");
    std::vector<double> sig(xs.size(), 1.0);
    LineFit fit = weighted_line_fit(xs, ys, sig);
    double resid = fit.chi2 / std::max<std::size_t>(1, xs.size() - 2);
    DecayFit out;
    out.rate = -fit.slope;
    out.se = fit.slope_se * std::sqrt(std::max(resid, 1e-30));
    out.points = static_cast<int>(xs.size());
    return out;
}

} // namespace isinglab
