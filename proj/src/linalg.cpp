#include "isinglab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isinglab {

std::vector<double> jacobi_eigenvalues(Mat m, Mat* eigvecs) {
    const int n = m.n;
    if (eigvecs) {
        *eigvecs = Mat(n);
        for (int i = 0; i < n; ++i) (*eigvecs)(i, i) = 1.0;
    }
    if (n == 0) return {};
    if (n == 1) return {m(0, 0)};

    auto off_diag_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += m(i, j) * m(i, j);
        return s;
    };

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_diag_norm() < 1e-26 * n * n) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = m(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double app = m(p, p), aqq = m(q, q);
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = m(k, p), akq = m(k, q);
                    m(k, p) = c * akp - s * akq;
                    m(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = m(p, k), aqk = m(q, k);
                    m(p, k) = c * apk - s * aqk;
                    m(q, k) = s * apk + c * aqk;
                }
                if (eigvecs) {
                    for (int k = 0; k < n; ++k) {
                        double vkp = (*eigvecs)(k, p), vkq = (*eigvecs)(k, q);
                        (*eigvecs)(k, p) = c * vkp - s * vkq;
                        (*eigvecs)(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return m(i, i) < m(j, j); });
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = m(order[i], order[i]);
    if (eigvecs) {
        Mat sorted(n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) sorted(i, j) = (*eigvecs)(i, order[j]);
        *eigvecs = std::move(sorted);
    }
    return ev;
}

std::vector<double> solve_linear(Mat a, std::vector<double> b) {
    const int n = a.n;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_linear: size mismatch");
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(best, col))) best = r;
        if (std::fabs(a(best, col)) < 1e-300) throw std::runtime_error("solve_linear: singular matrix");
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(best, j));
            std::swap(b[col], b[best]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& sigma) {
    if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 2)
        throw std::invalid_argument("weighted_line_fit: need >= 2 points with matching sigmas");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double w = 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    double det = sw * swxx - swx * swx;
    if (det <= 0.0) throw std::runtime_error("weighted_line_fit: degenerate abscissae");
    LineFit f;
    f.slope = (sw * swxy - swx * swy) / det;
    f.intercept = (swxx * swy - swx * swxy) / det;
    f.slope_se = std::sqrt(sw / det);
    f.intercept_se = std::sqrt(swxx / det);
    f.n_points = static_cast<int>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = (y[i] - f.slope * x[i] - f.intercept) / sigma[i];
        f.chi2 += r * r;
    }
    return f;
}

namespace {

double gamma_p_series(double s, double x) {
    double sum = 1.0 / s;
    double term = sum;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (s + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double gamma_q_contfrac(double s, double x) {
    // Lentz's continued fraction for Q(s,x), x > s+1.
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        double an = -static_cast<double>(i) * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

} // namespace

double gamma_q(double s, double x) {
    if (x < 0.0 || s <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_contfrac(s, x);
}

double chi_square_pvalue(double statistic, int dof) {
    if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

} // namespace isinglab
