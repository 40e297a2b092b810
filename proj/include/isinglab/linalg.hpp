#pragma once

#include <cstddef>
#include <vector>

namespace isinglab {

// Dense square matrix, row-major. Sized for exact small-chain work
// (state spaces up to a few thousand); nothing here is meant to scale.
struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.
// If eigvecs is non-null it receives the eigenvectors as columns.
std::vector<double> jacobi_eigenvalues(Mat m, Mat* eigvecs = nullptr);

// Solve A x = b by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(Mat a, std::vector<double> b);

// Weighted least-squares line fit y = slope*x + intercept with per-point
// standard deviations sigma (all > 0).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    double chi2 = 0.0;
    int n_points = 0;
};
LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& sigma);

// Regularized upper incomplete gamma Q(s, x); chi-square survival function
// is Q(df/2, x/2).
double gamma_q(double s, double x);
double chi_square_pvalue(double statistic, int dof);

} // namespace isinglab
