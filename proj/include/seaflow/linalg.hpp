#pragma once

#include <cmath>
#include <vector>

#include "seaflow/errors.hpp"

namespace seaflow {

// Small dense helpers for the least-squares fits. Row-major storage.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

// Gaussian elimination with partial pivoting; solves A x = b in place.
inline std::vector<double> solve_dense(Mat A, std::vector<double> b) {
    int n = A.rows;
    if (A.cols != n || static_cast<int>(b.size()) != n)
        throw BadParamsError("solve_dense: non-square system");
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::fabs(A(k, k));
        for (int r = k + 1; r < n; ++r) {
            double v = std::fabs(A(r, k));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw BadParamsError("solve_dense: singular matrix");
        if (piv != k) {
            for (int c = k; c < n; ++c) std::swap(A(k, c), A(piv, c));
            std::swap(b[k], b[piv]);
        }
        for (int r = k + 1; r < n; ++r) {
            double f = A(r, k) / A(k, k);
            if (f == 0.0) continue;
            for (int c = k; c < n; ++c) A(r, c) -= f * A(k, c);
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A(r, c) * x[c];
        x[r] = s / A(r, r);
    }
    return x;
}

// Least squares via normal equations with a tiny ridge for rank safety.
// X: m rows of p predictors, y: m targets. Returns p coefficients.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& X,
                                         const std::vector<double>& y, double ridge = 0.0) {
    size_t m = X.size();
    if (m == 0 || y.size() != m) throw BadParamsError("least_squares: empty or mismatched input");
    int p = static_cast<int>(X[0].size());
    Mat XtX(p, p);
    std::vector<double> Xty(p, 0.0);
    for (size_t r = 0; r < m; ++r) {
        const auto& row = X[r];
        for (int i = 0; i < p; ++i) {
            Xty[i] += row[i] * y[r];
            for (int j = i; j < p; ++j) XtX(i, j) += row[i] * row[j];
        }
    }
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < i; ++j) XtX(i, j) = XtX(j, i);
    for (int i = 0; i < p; ++i) XtX(i, i) += ridge;
    return solve_dense(std::move(XtX), std::move(Xty));
}

}  // namespace seaflow
