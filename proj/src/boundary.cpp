#include "putlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "putlab/io.hpp"

namespace putlab {

const char* to_string(CurveSource source) {
    switch (source) {
        case CurveSource::Pde: return "pde";
        case CurveSource::Tree: return "tree";
        case CurveSource::Asymptotic: return "asymptotic";
    }
    return "unknown";
}

const char* to_string(ConvexityCoordinate coordinate) {
    return coordinate == ConvexityCoordinate::CalendarXofT ? "X_of_T" : "s_of_t";
}

BoundaryCurve extract_boundary(const PriceSurface& surface, const MarketParams& params) {
    params.validate();
    const Grid& g = surface.grid;
    const double s2 = params.sigma * params.sigma;

    BoundaryCurve curve;
    curve.source = CurveSource::Pde;
    curve.noise = 2.0 * g.dx;
    curve.t_spacing = g.dt;
    curve.samples.reserve(g.nt - 1);

    for (int n = 1; n < g.nt; ++n) {
        const int ia = surface.last_active_index(n);
        if (ia < 0) {
            ++curve.skipped_levels;
            continue;
        }
        double s = g.x(ia);
        if (ia + 1 < g.nx) {
            const double g0 = surface.value(n, ia) - surface.obstacle[ia];
            const double g1 = surface.value(n, ia + 1) - surface.obstacle[ia + 1];
            if (g1 > g0)  // zero crossing of the line through (x_ia, g0), (x_ia+1, g1)
                s = std::clamp(g.x(ia) - g.dx * g0 / (g1 - g0), g.x(ia) - g.dx, g.x(ia));
        }
        BoundarySample sample;
        sample.level = n;
        sample.t = g.t(n);
        sample.s = s;
        sample.T = params.expiry - 2.0 * sample.t / s2;
        sample.X = std::exp(s);
        curve.samples.push_back(sample);
    }
    if (curve.samples.empty())
        throw ExtractionError(
            "no exercised node at any time level; grid likely truncated above the boundary");
    return curve;
}

MonotonicityReport monotonicity_check(const BoundaryCurve& curve, double mono_tol) {
    if (curve.size() < 2) throw std::invalid_argument("need at least two samples");
    MonotonicityReport report;
    report.mono_tol = mono_tol < 0.0 ? curve.noise / 4.0 : mono_tol;
    report.worst_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < curve.size(); ++j) {
        const double rise = curve.samples[j + 1].s - curve.samples[j].s;
        if (rise > report.worst_increase) {
            report.worst_increase = rise;
            report.worst_t = curve.samples[j].t;
        }
        if (rise > report.mono_tol) ++report.violations;
    }
    report.pass = report.violations == 0;
    return report;
}

double PastingResiduals::max_value_from(double t_lo) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j)
        if (t[j] >= t_lo) worst = std::max(worst, value_residual[j]);
    return worst;
}

double PastingResiduals::max_derivative_from(double t_lo) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j)
        if (t[j] >= t_lo) worst = std::max(worst, derivative_residual[j]);
    return worst;
}

PastingResiduals smooth_pasting_residual(const PriceSurface& surface, const BoundaryCurve& curve,
                                         const MarketParams& params) {
    const Grid& g = surface.grid;
    const double K = params.strike;
    PastingResiduals out;
    out.t.reserve(curve.size());
    for (const BoundarySample& sample : curve.samples) {
        const int n = sample.level;
        const int ia = surface.last_active_index(n);
        if (ia < 0 || ia + 1 >= g.nx) continue;
        const double s = sample.s;
        const double pasting_value = K - std::exp(s);
        const double u0 = surface.value(n, ia);
        const double u1 = surface.value(n, ia + 1);
        const double u_at_s = u0 + (s - g.x(ia)) / g.dx * (u1 - u0);
        const double u_x = (u1 - pasting_value) / (g.x(ia + 1) - s);
        out.t.push_back(sample.t);
        out.value_residual.push_back(std::abs(u_at_s - pasting_value));
        out.derivative_residual.push_back(std::abs(u_x + std::exp(s)));
    }
    out.max_value_residual = out.max_value_from(0.0);
    out.max_derivative_residual = out.max_derivative_from(0.0);
    return out;
}

namespace {

struct SeriesView {
    std::vector<double> t, y;
};

SeriesView select_series(const BoundaryCurve& curve, ConvexityCoordinate coordinate,
                         double exclude_t_below) {
    SeriesView view;
    for (const BoundarySample& sample : curve.samples) {
        if (sample.t < exclude_t_below) continue;
        view.t.push_back(sample.t);
        view.y.push_back(coordinate == ConvexityCoordinate::CalendarXofT ? sample.X : sample.s);
    }
    return view;
}

}  // namespace

ConvexityVerdict convexity_check(const BoundaryCurve& curve, const ConvexityOptions& options) {
    for (std::size_t j = 0; j + 1 < curve.size(); ++j)
        if (!(curve.samples[j + 1].t > curve.samples[j].t))
            throw std::invalid_argument("curve times must be strictly increasing");

    const double exclude =
        options.exclude_t_below < 0.0 ? 4.0 * curve.t_spacing : options.exclude_t_below;
    SeriesView view = select_series(curve, options.coordinate, exclude);
    if (view.y.size() < 3) throw std::invalid_argument("need at least three usable samples");

    if (options.presmooth) {
        std::vector<double> smooth = view.y;
        for (std::size_t j = 1; j + 1 < view.y.size(); ++j)
            smooth[j] = (view.y[j - 1] + view.y[j] + view.y[j + 1]) / 3.0;
        view.y = std::move(smooth);
    }

    std::vector<double> gaps(view.t.size() - 1);
    for (std::size_t j = 0; j + 1 < view.t.size(); ++j) gaps[j] = view.t[j + 1] - view.t[j];
    std::vector<double> sorted_gaps = gaps;
    std::nth_element(sorted_gaps.begin(), sorted_gaps.begin() + sorted_gaps.size() / 2,
                     sorted_gaps.end());
    const double median_gap = sorted_gaps[sorted_gaps.size() / 2];

    double noise = options.tol_scale * curve.noise;
    if (options.coordinate == ConvexityCoordinate::CalendarXofT) {
        double x_cap = 0.0;
        for (const BoundarySample& sample : curve.samples) x_cap = std::max(x_cap, sample.X);
        noise *= x_cap;  // s-units noise mapped to price units
    }

    ConvexityVerdict verdict;
    verdict.coordinate = options.coordinate;
    verdict.tolerance_used = noise;
    verdict.min_second_difference = std::numeric_limits<double>::infinity();

    bool in_run = false;
    double run_lo = 0.0, run_hi = 0.0;
    int used = 0;
    for (std::size_t j = 1; j + 1 < view.y.size(); ++j) {
        // second differences need near-uniform local spacing
        if (std::abs(gaps[j - 1] - median_gap) > 0.1 * median_gap ||
            std::abs(gaps[j] - median_gap) > 0.1 * median_gap) {
            if (in_run) {
                verdict.violation_intervals.emplace_back(run_lo, run_hi);
                in_run = false;
            }
            continue;
        }
        ++used;
        const double d2 = view.y[j - 1] - 2.0 * view.y[j] + view.y[j + 1];
        verdict.min_second_difference = std::min(verdict.min_second_difference, d2);
        if (d2 < -noise) {
            if (!in_run) {
                in_run = true;
                run_lo = view.t[j];
            }
            run_hi = view.t[j];
        } else if (in_run) {
            verdict.violation_intervals.emplace_back(run_lo, run_hi);
            in_run = false;
        }
    }
    if (in_run) verdict.violation_intervals.emplace_back(run_lo, run_hi);
    if (used == 0) throw std::invalid_argument("no uniformly spaced sample triple available");
    verdict.samples_used = used;
    verdict.convex = verdict.violation_intervals.empty();
    return verdict;
}

std::vector<RegimeReport> concavity_scan(const std::vector<MarketParams>& sets,
                                         const ScanGridSpec& grid_spec,
                                         const SolverConfig& solver,
                                         const ConvexityOptions& options, int jobs) {
    if (sets.empty()) throw std::invalid_argument("parameter list is empty");
    jobs = std::max(1, jobs);

    auto run_one = [&](const MarketParams& params) {
        RegimeReport row;
        row.params = params;
        try {
            row.regime = classify_regime(params);
            const TransformedParams tp = transform(params);
            const Grid grid = build_grid(tp, params, grid_spec.nx, grid_spec.nt);
            const auto [surface, report] = solve_lcp(params, grid, solver);
            const BoundaryCurve curve = extract_boundary(surface, params);
            ConvexityOptions calendar = options;
            calendar.coordinate = ConvexityCoordinate::CalendarXofT;
            row.calendar = convexity_check(curve, calendar);
            ConvexityOptions transformed = options;
            transformed.coordinate = ConvexityCoordinate::TransformedSofT;
            row.transformed = convexity_check(curve, transformed);
            row.solved = true;
        } catch (const std::exception& err) {
            row.error = err.what();
        }
        return row;
    };

    std::vector<RegimeReport> rows(sets.size());
    std::size_t next = 0;
    while (next < sets.size()) {
        const std::size_t batch = std::min<std::size_t>(jobs, sets.size() - next);
        std::vector<std::future<RegimeReport>> futures;
        futures.reserve(batch);
        for (std::size_t b = 0; b < batch; ++b)
            futures.push_back(std::async(std::launch::async, run_one, sets[next + b]));
        for (std::size_t b = 0; b < batch; ++b) rows[next + b] = futures[b].get();
        next += batch;
    }
    return rows;
}

std::string boundary_csv(const BoundaryCurve& curve) {
    io::CsvWriter csv({"T", "X_f", "t", "s", "source"});
    for (const BoundarySample& sample : curve.samples) {
        csv.add_cell(sample.T);
        csv.add_cell(sample.X);
        csv.add_cell(sample.t);
        csv.add_cell(sample.s);
        csv.add_cell(std::string(to_string(curve.source)));
        csv.end_row();
    }
    return csv.str();
}

std::vector<double> curve_derivative(const BoundaryCurve& curve, double window_frac) {
    const std::size_t n = curve.size();
    std::vector<double> deriv(n, 0.0);
    if (n < 2) return deriv;
    if (n < 5) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t lo = j == 0 ? 0 : j - 1;
            const std::size_t hi = j + 1 < n ? j + 1 : j;
            deriv[j] = std::min(0.0, (curve.samples[hi].s - curve.samples[lo].s) /
                                         (curve.samples[hi].t - curve.samples[lo].t));
        }
        return deriv;
    }
    // extraction quantises s to grid nodes, so the raw curve is a staircase;
    // the fit window must span several node hops, which a fixed fraction of
    // the curve does while a fixed sample count does not
    const double half_window =
        window_frac * (curve.samples.back().t - curve.samples.front().t);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t lo = j, hi = j;
        while (lo > 0 && curve.samples[j].t - curve.samples[lo - 1].t <= half_window) --lo;
        while (hi + 1 < n && curve.samples[hi + 1].t - curve.samples[j].t <= half_window) ++hi;
        while (hi - lo + 1 < 5) {  // least-squares quadratic needs headroom
            if (lo > 0) --lo;
            if (hi + 1 < n) ++hi;
            if (lo == 0 && hi == n - 1) break;
        }
        double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double b[3] = {0, 0, 0};
        for (std::size_t w = lo; w <= hi; ++w) {
            const double dt = curve.samples[w].t - curve.samples[j].t;
            const double y = curve.samples[w].s;
            const double pow_dt[3] = {1.0, dt, dt * dt};
            for (int row = 0; row < 3; ++row) {
                for (int col = 0; col < 3; ++col) m[row][col] += pow_dt[row] * pow_dt[col];
                b[row] += pow_dt[row] * y;
            }
        }
        // 3x3 Gaussian elimination with partial pivoting
        int order[3] = {0, 1, 2};
        bool singular = false;
        for (int col = 0; col < 3 && !singular; ++col) {
            int piv = col;
            for (int row = col + 1; row < 3; ++row)
                if (std::abs(m[order[row]][col]) > std::abs(m[order[piv]][col])) piv = row;
            std::swap(order[col], order[piv]);
            if (m[order[col]][col] == 0.0) {
                singular = true;
                break;
            }
            for (int row = col + 1; row < 3; ++row) {
                const double f = m[order[row]][col] / m[order[col]][col];
                for (int k = col; k < 3; ++k) m[order[row]][k] -= f * m[order[col]][k];
                b[order[row]] -= f * b[order[col]];
            }
        }
        if (singular) {
            deriv[j] = 0.0;
            continue;
        }
        double c[3];
        for (int row = 2; row >= 0; --row) {
            double s = b[order[row]];
            for (int k = row + 1; k < 3; ++k) s -= m[order[row]][k] * c[k];
            c[row] = s / m[order[row]][row];
        }
        deriv[j] = std::min(0.0, c[1]);
    }
    return deriv;
}

BoundaryCurve pairwise_average(const BoundaryCurve& curve) {
    BoundaryCurve out;
    out.source = curve.source;
    out.noise = curve.noise;
    out.t_spacing = curve.t_spacing;
    out.skipped_levels = curve.skipped_levels;
    for (std::size_t j = 0; j + 1 < curve.size(); ++j) {
        const BoundarySample& a = curve.samples[j];
        const BoundarySample& b = curve.samples[j + 1];
        BoundarySample mid;
        mid.level = a.level;
        mid.t = 0.5 * (a.t + b.t);
        mid.s = 0.5 * (a.s + b.s);
        mid.T = 0.5 * (a.T + b.T);
        mid.X = std::exp(mid.s);
        out.samples.push_back(mid);
    }
    return out;
}

}  // namespace putlab
