#include "putlab/pde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "putlab/io.hpp"

namespace putlab {

const char* to_string(Scheme scheme) {
    return scheme == Scheme::Psor ? "psor" : "brennan-schwartz";
}

Grid build_grid(const TransformedParams& tp, const MarketParams& params, int nx, int nt) {
    params.validate();
    if (nx < 3) throw GridError("nx must be >= 3");
    if (nt < 2) throw GridError("nt must be >= 2");
    const double half_width = std::max(5.0 * params.sigma * std::sqrt(params.expiry), 3.0);
    Grid grid;
    grid.x_min = tp.d - half_width;
    grid.x_max = tp.d + half_width;
    grid.nx = nx;
    grid.nt = nt;
    grid.t_max = tp.t_max;
    grid.dx = (grid.x_max - grid.x_min) / (nx - 1);
    grid.dt = tp.t_max / (nt - 1);
    if (!(grid.dx > 0.0) || !(grid.dt > 0.0)) throw GridError("degenerate grid extents");
    const double exp_bnd = std::log(boundary_at_expiry(params));
    if (!(grid.x_min < exp_bnd && exp_bnd < grid.x_max))
        throw GridError("grid does not bracket the expiry boundary");
    return grid;
}

std::vector<double> apply_operator_l0(const std::vector<double>& u_row,
                                      const TransformedParams& tp, const Grid& grid) {
    const int nx = grid.nx;
    if (static_cast<int>(u_row.size()) != nx)
        throw std::invalid_argument("row length does not match grid");
    std::vector<double> out(nx, std::numeric_limits<double>::quiet_NaN());
    const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
    const double drift = (tp.k - tp.h - 1.0) / (2.0 * grid.dx);
    for (int i = 1; i < nx - 1; ++i) {
        out[i] = (u_row[i - 1] - 2.0 * u_row[i] + u_row[i + 1]) * inv_dx2 +
                 (u_row[i + 1] - u_row[i - 1]) * drift - tp.k * u_row[i];
    }
    return out;
}

double PriceSurface::interpolate(double t, double x) const {
    const Grid& g = grid;
    const double eps_t = 1e-12 * std::max(1.0, g.t_max);
    if (t < -eps_t || t > g.t_max + eps_t) throw std::domain_error("t outside surface");
    t = std::clamp(t, 0.0, g.t_max);
    if (x < g.x_min || x > g.x_max) throw std::domain_error("x outside surface");
    int n = std::min(static_cast<int>(t / g.dt), g.nt - 2);
    int i = std::min(static_cast<int>((x - g.x_min) / g.dx), g.nx - 2);
    const double wt = std::clamp((t - g.t(n)) / g.dt, 0.0, 1.0);
    const double wx = std::clamp((x - g.x(i)) / g.dx, 0.0, 1.0);
    return (1 - wt) * ((1 - wx) * value(n, i) + wx * value(n, i + 1)) +
           wt * ((1 - wx) * value(n + 1, i) + wx * value(n + 1, i + 1));
}

int PriceSurface::last_active_index(int n) const {
    for (int i = grid.nx - 1; i >= 0; --i)
        if (is_active(n, i)) return i;
    return -1;
}

namespace {

// |min(Mx - rhs, x - psi)| over all rows: zero for the exact LCP solution.
double lcp_violation(const Tridiagonal& m, const std::vector<double>& x,
                     const std::vector<double>& rhs, const std::vector<double>& psi) {
    const std::vector<double> mx = m.multiply(x);
    double worst = 0.0;
    for (int i = 0; i < m.size(); ++i)
        worst = std::max(worst, std::abs(std::min(mx[i] - rhs[i], x[i] - psi[i])));
    return worst;
}

}  // namespace

std::pair<PriceSurface, SolveReport> solve_lcp(const MarketParams& params, const Grid& grid,
                                               const SolverConfig& config) {
    params.validate();
    if (!(config.theta >= 0.0 && config.theta <= 1.0))
        throw std::invalid_argument("theta must lie in [0,1]");
    if (!(config.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    const auto tick = std::chrono::steady_clock::now();
    const TransformedParams tp = transform(params);
    const int nx = grid.nx, nt = grid.nt, m = nx - 2;

    PriceSurface surface;
    surface.grid = grid;
    surface.act_tol = std::max(10.0 * config.tol, 1e-7 * params.strike);
    surface.obstacle.resize(nx);
    for (int i = 0; i < nx; ++i)
        surface.obstacle[i] = std::max(0.0, params.strike - std::exp(grid.x(i)));
    surface.u.assign(static_cast<std::size_t>(nt) * nx, 0.0);
    surface.active.assign(static_cast<std::size_t>(nt) * nx, 0);

    SolveReport report;
    report.scheme = to_string(config.scheme);
    if (config.theta < 0.5) {
        const double explicit_part = 1.0 - 2.0 * config.theta;
        if (grid.dt / (grid.dx * grid.dx) > 0.5 / explicit_part) report.stability_warning = true;
    }

    // spatial operator coefficients of L0 on the interior
    const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
    const double drift = (tp.k - tp.h - 1.0) / (2.0 * grid.dx);
    const double a_lo = inv_dx2 - drift;
    const double a_di = -2.0 * inv_dx2 - tp.k;
    const double a_up = inv_dx2 + drift;

    const double left_bc = params.strike - std::exp(grid.x_min);  // exercise value
    const double right_bc = 0.0;

    // t = 0 row is the payoff itself
    for (int i = 0; i < nx; ++i) surface.u[i] = surface.obstacle[i];

    std::vector<double> psi(m);
    for (int i = 0; i < m; ++i) psi[i] = surface.obstacle[i + 1];

    std::vector<double> prev(surface.u.begin(), surface.u.begin() + nx);
    std::vector<double> interior(m);

    const bool use_rannacher = config.rannacher_halfsteps > 0 && config.theta < 1.0;
    const int rannacher_full_steps =
        use_rannacher ? std::min((config.rannacher_halfsteps + 1) / 2, nt - 1) : 0;

    auto do_substep = [&](std::vector<double>& from, double theta, double dt_sub,
                          int& iter_budget, int& iters_used, double& comp) {
        Tridiagonal m1;
        m1.lower.assign(m, -theta * dt_sub * a_lo);
        m1.diag.assign(m, 1.0 - theta * dt_sub * a_di);
        m1.upper.assign(m, -theta * dt_sub * a_up);

        std::vector<double> rhs(m);
        const double ex = (1.0 - theta) * dt_sub;
        for (int i = 0; i < m; ++i) {
            const int j = i + 1;
            double lu = (from[j - 1] - 2.0 * from[j] + from[j + 1]) * inv_dx2 +
                        (from[j + 1] - from[j - 1]) * drift - tp.k * from[j];
            rhs[i] = from[j] + ex * lu;
        }
        rhs[0] += theta * dt_sub * a_lo * left_bc;
        rhs[m - 1] += theta * dt_sub * a_up * right_bc;

        for (int i = 0; i < m; ++i) interior[i] = std::max(from[i + 1], psi[i]);
        if (config.scheme == Scheme::BrennanSchwartz) {
            interior = brennan_schwartz_sweep(m1, rhs, psi, BsSweepDirection::FromUpper);
            iters_used += 1;
        } else {
            // per-step target well below tol: step errors accumulate over
            // the march, and the cross-scheme agreement is on the final
            // surface
            const double resid_target =
                std::max(config.tol * 0.01, 1e-13 * std::max(1.0, params.strike));
            double sweep_tol = resid_target;
            while (true) {
                auto [sol, used] =
                    psor_sweep(m1, rhs, psi, config.omega, std::move(interior), sweep_tol,
                               iter_budget);
                interior = std::move(sol);
                iters_used += used;
                iter_budget -= used;
                if (lcp_violation(m1, interior, rhs, psi) <= resid_target) break;
                if (iter_budget <= 0)
                    throw IterationLimitError("lcp residual not met within max_iter",
                                              iters_used);
                sweep_tol *= 0.25;
            }
        }
        comp = std::max(comp, lcp_violation(m1, interior, rhs, psi));
        from[0] = left_bc;
        from[nx - 1] = right_bc;
        for (int i = 0; i < m; ++i) from[i + 1] = interior[i];
    };

    report.iterations.reserve(nt - 1);
    for (int n = 1; n < nt; ++n) {
        int iter_budget = config.max_iter;
        int iters_used = 0;
        double comp = 0.0;
        try {
            if (n <= rannacher_full_steps) {
                do_substep(prev, 1.0, grid.dt / 2.0, iter_budget, iters_used, comp);
                do_substep(prev, 1.0, grid.dt / 2.0, iter_budget, iters_used, comp);
            } else {
                do_substep(prev, config.theta, grid.dt, iter_budget, iters_used, comp);
            }
        } catch (const IterationLimitError& err) {
            throw SolveError(std::string("time level ") + std::to_string(n) + ": " + err.what(),
                             report, n);
        }
        report.iterations.push_back(iters_used);
        report.max_complementarity = std::max(report.max_complementarity, comp);
        std::copy(prev.begin(), prev.end(),
                  surface.u.begin() + static_cast<std::size_t>(n) * nx);
    }

    // exercised nodes: on the obstacle and in the money
    for (int n = 0; n < nt; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * nx;
        for (int i = 0; i < nx; ++i) {
            const bool on_obstacle = surface.u[row + i] - surface.obstacle[i] <= surface.act_tol;
            surface.active[row + i] = (on_obstacle && surface.obstacle[i] > 0.0) ? 1 : 0;
        }
    }

    report.max_pde_residual = residual_report(surface, tp).max_pde_residual;
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    return {std::move(surface), std::move(report)};
}

SolveReport residual_report(const PriceSurface& surface, const TransformedParams& tp,
                            double t_exclude) {
    const Grid& g = surface.grid;
    if (t_exclude < 0.0) t_exclude = 4.0 * g.dt;
    SolveReport report;
    report.scheme = "central-stencil";

    const double inv_dx2 = 1.0 / (g.dx * g.dx);
    const double drift = (tp.k - tp.h - 1.0) / (2.0 * g.dx);

    double max_obstacle_violation = 0.0;
    for (int n = 1; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i)
            max_obstacle_violation =
                std::max(max_obstacle_violation, surface.obstacle[i] - surface.value(n, i));

    double max_resid = 0.0, max_comp = 0.0;
    for (int n = 2; n < g.nt - 1; ++n) {
        if (g.t(n) < t_exclude) continue;
        const int ia = std::max({surface.last_active_index(n - 1), surface.last_active_index(n),
                                 surface.last_active_index(n + 1)});
        for (int i = 1; i < g.nx - 1; ++i) {
            const double u_t = (surface.value(n + 1, i) - surface.value(n - 1, i)) / (2.0 * g.dt);
            const double l0 =
                (surface.value(n, i - 1) - 2.0 * surface.value(n, i) + surface.value(n, i + 1)) *
                    inv_dx2 +
                (surface.value(n, i + 1) - surface.value(n, i - 1)) * drift -
                tp.k * surface.value(n, i);
            const double r = u_t - l0;
            const double gap = surface.value(n, i) - surface.obstacle[i];
            max_comp = std::max(max_comp, std::abs(std::min(r, gap)));
            if (i >= ia + 2 && !surface.is_active(n, i))
                max_resid = std::max(max_resid, std::abs(r));
        }
    }
    report.max_pde_residual = max_resid;
    report.max_complementarity = std::max(max_comp, max_obstacle_violation);
    return report;
}

std::string surface_csv(const PriceSurface& surface) {
    io::CsvWriter csv({"t", "x", "u", "active"});
    for (int n = 0; n < surface.grid.nt; ++n)
        for (int i = 0; i < surface.grid.nx; ++i) {
            csv.add_cell(surface.grid.t(n));
            csv.add_cell(surface.grid.x(i));
            csv.add_cell(surface.value(n, i));
            csv.add_cell(static_cast<long long>(surface.is_active(n, i) ? 1 : 0));
            csv.end_row();
        }
    return csv.str();
}

}  // namespace putlab
