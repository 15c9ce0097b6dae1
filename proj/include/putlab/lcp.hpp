#ifndef PUTLAB_LCP_HPP
#define PUTLAB_LCP_HPP

#include <stdexcept>
#include <utility>
#include <vector>

namespace putlab {

// Tridiagonal matrix, rows i: lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1].
// lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    int size() const { return static_cast<int>(diag.size()); }

    std::vector<double> multiply(const std::vector<double>& x) const;

    // Thomas algorithm. Throws on pivot breakdown.
    std::vector<double> solve(const std::vector<double>& rhs) const;
};

class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& what, int iterations_done)
        : std::runtime_error(what), iterations_done(iterations_done) {}
    int iterations_done;
};

// Projected SOR for the LCP  min(Ax - b, x - psi) = 0  with A tridiagonal
// and strictly diagonally dominant. Stops when the sup-norm update falls
// below tol. Returns the iterate and the number of sweeps used.
std::pair<std::vector<double>, int> psor_sweep(const Tridiagonal& matrix,
                                               const std::vector<double>& rhs,
                                               const std::vector<double>& obstacle,
                                               double omega,
                                               std::vector<double> u_guess,
                                               double tol,
                                               int max_iter);

// Orientation of the Brennan-Schwartz elimination pass. FromUpper
// eliminates the superdiagonal starting at the last row and substitutes
// upward from index 0 with projection; correct when the exercise region
// is a lower half-line (the put case). FromLower is the mirror image.
enum class BsSweepDirection { FromUpper, FromLower };

// One-pass tridiagonal elimination with componentwise projection onto the
// obstacle. Exact for LCPs whose active set is a one-sided contiguous block.
std::vector<double> brennan_schwartz_sweep(const Tridiagonal& matrix,
                                           const std::vector<double>& rhs,
                                           const std::vector<double>& obstacle,
                                           BsSweepDirection direction = BsSweepDirection::FromUpper);

}  // namespace putlab

#endif
