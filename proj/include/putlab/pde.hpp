#ifndef PUTLAB_PDE_HPP
#define PUTLAB_PDE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "putlab/lcp.hpp"
#include "putlab/market.hpp"

namespace putlab {

// Uniform grid over [x_min, x_max] x [0, t_max] in transformed variables.
struct Grid {
    double x_min, x_max;
    int nx, nt;
    double dx, dt;
    double t_max;

    double x(int i) const { return x_min + i * dx; }
    double t(int n) const { return n * dt; }
};

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveReport;

// Extents d +- max(5*sigma*sqrt(T_F), 3). Throws GridError when the
// resulting box fails to bracket log(strike) and the expiry boundary.
Grid build_grid(const TransformedParams& tp, const MarketParams& params, int nx, int nt);

enum class Scheme { Psor, BrennanSchwartz };

const char* to_string(Scheme scheme);

struct SolverConfig {
    Scheme scheme = Scheme::Psor;
    double theta = 0.5;       // 0 explicit, 1/2 Crank-Nicolson, 1 implicit
    double tol = 1e-8;        // value-units residual target
    int max_iter = 10000;     // PSOR sweeps per time level
    double omega = 1.5;       // PSOR relaxation
    int rannacher_halfsteps = 4;  // fully implicit half-steps replacing the first CN steps
};

struct SolveReport {
    std::vector<int> iterations;      // per computed time level (levels 1..nt-1)
    double max_complementarity = 0;   // scheme-based min(u - psi, residual), worst node
    double max_pde_residual = 0;      // central-stencil residual on the inactive interior
    std::string scheme;
    double runtime_seconds = 0;
    bool stability_warning = false;
};

// Iteration budget exhausted mid-march; carries whatever was solved.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, SolveReport partial, int level)
        : std::runtime_error(what), partial_report(std::move(partial)), failed_level(level) {}
    SolveReport partial_report;
    int failed_level;
};

// Solved value surface. u and active are row-major (nt rows of nx), the
// active flag marks exercised nodes: u - psi <= act_tol and psi > 0.
struct PriceSurface {
    Grid grid;
    std::vector<double> u;
    std::vector<std::uint8_t> active;
    std::vector<double> obstacle;
    double act_tol = 0;

    double value(int n, int i) const { return u[static_cast<std::size_t>(n) * grid.nx + i]; }
    bool is_active(int n, int i) const {
        return active[static_cast<std::size_t>(n) * grid.nx + i] != 0;
    }

    // Bilinear interpolation at (t, x); clamps t to [0, t_max] within
    // roundoff, throws on x outside the grid.
    double interpolate(double t, double x) const;

    // Largest active index at a level, or -1 when the level has none.
    int last_active_index(int n) const;
};

// Discrete L0 = d^2/dx^2 + (k-h-1) d/dx - k applied to one row with
// central differences. Endpoint entries are left as NaN.
std::vector<double> apply_operator_l0(const std::vector<double>& u_row,
                                      const TransformedParams& tp, const Grid& grid);

// Backward-in-calendar-time LCP march producing the surface and a report.
std::pair<PriceSurface, SolveReport> solve_lcp(const MarketParams& params, const Grid& grid,
                                               const SolverConfig& config = {});

// Scheme-independent a-posteriori residuals: central-in-t time derivative
// against L0 on inactive nodes at least two cells from the active set,
// plus the worst complementarity violation. Levels with t < t_exclude are
// skipped (near-expiry data is not smooth); t_exclude < 0 means 4*dt.
SolveReport residual_report(const PriceSurface& surface, const TransformedParams& tp,
                            double t_exclude = -1.0);

// CSV dump, header `t,x,u,active`, row-major by time level.
std::string surface_csv(const PriceSurface& surface);

}  // namespace putlab

#endif
