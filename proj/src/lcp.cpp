#include "putlab/lcp.hpp"

#include <algorithm>
#include <cmath>

namespace putlab {

std::vector<double> Tridiagonal::multiply(const std::vector<double>& x) const {
    const int n = size();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i] * x[i - 1];
        if (i < n - 1) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

std::vector<double> Tridiagonal::solve(const std::vector<double>& rhs) const {
    const int n = size();
    std::vector<double> c(n), d(n), x(n);
    double piv = diag[0];
    if (piv == 0.0) throw std::runtime_error("tridiagonal pivot breakdown at row 0");
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for (int i = 1; i < n; ++i) {
        piv = diag[i] - lower[i] * c[i - 1];
        if (piv == 0.0)
            throw std::runtime_error("tridiagonal pivot breakdown at row " + std::to_string(i));
        c[i] = (i < n - 1) ? upper[i] / piv : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

std::pair<std::vector<double>, int> psor_sweep(const Tridiagonal& matrix,
                                               const std::vector<double>& rhs,
                                               const std::vector<double>& obstacle,
                                               double omega,
                                               std::vector<double> u_guess,
                                               double tol,
                                               int max_iter) {
    if (!(omega > 0.0 && omega < 2.0))
        throw std::invalid_argument("psor relaxation must lie in (0,2)");
    if (!(tol > 0.0)) throw std::invalid_argument("psor tol must be > 0");
    const int n = matrix.size();
    std::vector<double>& u = u_guess;
    for (int i = 0; i < n; ++i) u[i] = std::max(u[i], obstacle[i]);

    for (int iter = 1; iter <= max_iter; ++iter) {
        double max_update = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = rhs[i];
            if (i > 0) s -= matrix.lower[i] * u[i - 1];
            if (i < n - 1) s -= matrix.upper[i] * u[i + 1];
            const double gs = s / matrix.diag[i];
            const double candidate = u[i] + omega * (gs - u[i]);
            const double next = std::max(obstacle[i], candidate);
            max_update = std::max(max_update, std::abs(next - u[i]));
            u[i] = next;
        }
        if (max_update < tol) return {std::move(u), iter};
    }
    throw IterationLimitError("psor did not converge within " + std::to_string(max_iter) +
                                  " sweeps",
                              max_iter);
}

std::vector<double> brennan_schwartz_sweep(const Tridiagonal& matrix,
                                           const std::vector<double>& rhs,
                                           const std::vector<double>& obstacle,
                                           BsSweepDirection direction) {
    const int n = matrix.size();
    std::vector<double> dhat(n), bhat(n), x(n);
    if (direction == BsSweepDirection::FromUpper) {
        // remove the superdiagonal, last row first
        dhat[n - 1] = matrix.diag[n - 1];
        bhat[n - 1] = rhs[n - 1];
        for (int i = n - 2; i >= 0; --i) {
            if (dhat[i + 1] == 0.0)
                throw std::runtime_error("brennan-schwartz pivot breakdown");
            const double m = matrix.upper[i] / dhat[i + 1];
            dhat[i] = matrix.diag[i] - m * matrix.lower[i + 1];
            bhat[i] = rhs[i] - m * bhat[i + 1];
        }
        if (dhat[0] == 0.0) throw std::runtime_error("brennan-schwartz pivot breakdown");
        x[0] = std::max(obstacle[0], bhat[0] / dhat[0]);
        for (int i = 1; i < n; ++i) {
            if (dhat[i] == 0.0) throw std::runtime_error("brennan-schwartz pivot breakdown");
            x[i] = std::max(obstacle[i], (bhat[i] - matrix.lower[i] * x[i - 1]) / dhat[i]);
        }
    } else {
        // mirror image: remove the subdiagonal, first row first
        dhat[0] = matrix.diag[0];
        bhat[0] = rhs[0];
        for (int i = 1; i < n; ++i) {
            if (dhat[i - 1] == 0.0)
                throw std::runtime_error("brennan-schwartz pivot breakdown");
            const double m = matrix.lower[i] / dhat[i - 1];
            dhat[i] = matrix.diag[i] - m * matrix.upper[i - 1];
            bhat[i] = rhs[i] - m * bhat[i - 1];
        }
        if (dhat[n - 1] == 0.0) throw std::runtime_error("brennan-schwartz pivot breakdown");
        x[n - 1] = std::max(obstacle[n - 1], bhat[n - 1] / dhat[n - 1]);
        for (int i = n - 2; i >= 0; --i) {
            if (dhat[i] == 0.0) throw std::runtime_error("brennan-schwartz pivot breakdown");
            x[i] = std::max(obstacle[i], (bhat[i] - matrix.upper[i] * x[i + 1]) / dhat[i]);
        }
    }
    return x;
}

}  // namespace putlab
