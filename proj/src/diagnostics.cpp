#include "putlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "putlab/io.hpp"

namespace putlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

DiagnosticField compute_w_field(const PriceSurface& surface, const TransformedParams& tp,
                                const MarketParams& params, const BoundaryCurve& curve,
                                double wxx_floor) {
    const Grid& g = surface.grid;
    if (curve.empty()) throw DiagnosticsError("boundary curve is empty");

    DiagnosticField field;
    field.grid = g;
    field.d = tp.d;
    field.wxx_floor = wxx_floor < 0.0 ? 1e-4 * params.strike : wxx_floor;
    field.curve = curve;

    const int i_d = static_cast<int>(std::floor((tp.d - g.x_min) / g.dx));
    field.i_hi = std::min(g.nx - 1, i_d + 3);
    const int width = field.width();

    field.s_level.assign(g.nt, kNaN);
    field.sprime_level.assign(g.nt, kNaN);
    const std::vector<double> sprime = curve_derivative(curve);
    for (std::size_t j = 0; j < curve.size(); ++j) {
        const int n = curve.samples[j].level;
        if (n >= 0 && n < g.nt) {
            field.s_level[n] = curve.samples[j].s;
            field.sprime_level[n] = sprime[j];
        }
    }

    const std::size_t cells = static_cast<std::size_t>(g.nt) * width;
    field.w.assign(cells, kNaN);
    field.w_x.assign(cells, kNaN);
    field.w_xx.assign(cells, kNaN);
    field.w_xt.assign(cells, kNaN);
    field.v.assign(cells, kNaN);
    field.in_cd.assign(cells, 0);
    field.valid.assign(cells, 0);

    const double K = params.strike;
    // w as a formula extends smoothly past the boundary and past d;
    // masks decide where it is used
    for (int n = 1; n < g.nt; ++n)
        for (int i = 0; i <= field.i_hi; ++i)
            field.w[field.idx(n, i)] = surface.value(n, i) - (K - std::exp(g.x(i)));

    for (int n = 1; n < g.nt; ++n) {
        for (int i = 1; i < field.i_hi; ++i) {
            const std::size_t c = field.idx(n, i);
            field.w_x[c] = (field.w[c + 1] - field.w[c - 1]) / (2.0 * g.dx);
            field.w_xx[c] =
                (field.w[c - 1] - 2.0 * field.w[c] + field.w[c + 1]) / (g.dx * g.dx);
        }
    }
    const std::size_t row = width;
    for (int n = 1; n < g.nt; ++n) {
        for (int i = 1; i < field.i_hi; ++i) {
            const std::size_t c = field.idx(n, i);
            if (n >= 2 && n <= g.nt - 2) {
                field.w_xt[c] = (field.w_x[c + row] - field.w_x[c - row]) / (2.0 * g.dt);
            } else if (n == 1 && g.nt >= 4) {
                field.w_xt[c] = (-3.0 * field.w_x[c] + 4.0 * field.w_x[c + row] -
                                 field.w_x[c + 2 * row]) /
                                (2.0 * g.dt);
            } else if (n == g.nt - 1 && g.nt >= 4) {
                field.w_xt[c] = (3.0 * field.w_x[c] - 4.0 * field.w_x[c - row] +
                                 field.w_x[c - 2 * row]) /
                                (2.0 * g.dt);
            }
        }
    }

    long in_cd_count = 0;
    for (int n = 1; n < g.nt; ++n) {
        const double s_n = field.s_level[n];
        if (std::isnan(s_n)) continue;
        // clearance must hold at every level the t-stencil touches
        double s_max = s_n;
        const int n_lo = (n == 1) ? 1 : n - 1;
        const int n_hi_stencil = (n == 1) ? std::min(3, g.nt - 1)
                                          : (n == g.nt - 1 ? g.nt - 1 : n + 1);
        const int n_lo_stencil = (n == g.nt - 1) ? std::max(1, g.nt - 3) : n_lo;
        for (int m = n_lo_stencil; m <= n_hi_stencil; ++m)
            if (!std::isnan(field.s_level[m])) s_max = std::max(s_max, field.s_level[m]);
        for (int i = 1; i <= field.i_hi; ++i) {
            const double x = g.x(i);
            if (x > s_n && x < tp.d) {
                field.in_cd[field.idx(n, i)] = 1;
                ++in_cd_count;
                if (x >= s_max + 2.0 * g.dx && x <= tp.d - 2.0 * g.dx &&
                    !std::isnan(field.w_xt[field.idx(n, i)]))
                    field.valid[field.idx(n, i)] = 1;
            }
        }
    }
    if (in_cd_count == 0)
        throw DiagnosticsError("C_d is empty: boundary sits at or above log-strike");
    return field;
}

DiagnosticField& compute_v_field(DiagnosticField& field) {
    const Grid& g = field.grid;
    field.invalidated_wxx = 0;
    for (int n = 1; n < g.nt; ++n) {
        for (int i = 1; i < field.i_hi; ++i) {
            const std::size_t c = field.idx(n, i);
            if (!field.valid[c]) continue;
            if (field.w_xx[c] < field.wxx_floor) {
                field.valid[c] = 0;
                ++field.invalidated_wxx;
                continue;
            }
            field.v[c] = field.w_xt[c] / field.w_xx[c];
        }
    }
    field.v_computed = true;
    return field;
}

namespace {

// quadratic through (x0,y0),(x0+dx,y1),(x0+2dx,y2); value/slope at x,
// curvature is constant
struct QuadFit {
    double value, slope, curvature;
};

QuadFit quad_extrapolate(double x0, double dx, double y0, double y1, double y2, double x) {
    const double c2 = (y0 - 2.0 * y1 + y2) / (2.0 * dx * dx);
    const double c1 = (y2 - y0) / (2.0 * dx);  // slope at the middle node
    const double xm = x0 + dx;
    QuadFit fit;
    fit.value = y1 + c1 * (x - xm) + c2 * (x - xm) * (x - xm);
    fit.slope = c1 + 2.0 * c2 * (x - xm);
    fit.curvature = 2.0 * c2;
    return fit;
}

}  // namespace

BoundaryIdentityReport boundary_identity_report(const DiagnosticField& field,
                                                const BoundaryCurve& curve,
                                                const TransformedParams& tp,
                                                const MarketParams& params,
                                                const IdentityOptions& options) {
    const Grid& g = field.grid;
    const double K = params.strike;
    const double t_lo = options.interior_t_lo < 0.0 ? 4.0 * g.dt : options.interior_t_lo;
    const double clearance =
        options.interior_clearance < 0.0 ? 2.0 * g.dx : options.interior_clearance;
    BoundaryIdentityReport report;
    report.sign_check_applicable = tp.h > 0.0;

    // one-sided w_xx(s(t),t) per sample, reused for the sign check
    std::vector<double> wxx_at_boundary(curve.size(), kNaN);

    for (std::size_t j = 0; j < curve.size(); ++j) {
        const BoundarySample& sample = curve.samples[j];
        const int n = sample.level;
        if (n < 1 || n >= g.nt) continue;
        const double s = sample.s;
        int i_b = static_cast<int>(std::floor((s - g.x_min) / g.dx)) + 1;
        if (i_b < 1) i_b = 1;
        if (i_b + 2 > field.i_hi) continue;  // no room for the stencil left of d
        if (!(g.x(i_b + 2) < tp.d)) continue;

        const double w0 = field.w[field.idx(n, i_b)];
        const double w1 = field.w[field.idx(n, i_b + 1)];
        const double w2 = field.w[field.idx(n, i_b + 2)];
        const QuadFit fit = quad_extrapolate(g.x(i_b), g.dx, w0, w1, w2, s);

        BoundaryIdentityRow row;
        row.level = n;
        row.t = sample.t;
        row.s = s;
        row.sprime = field.sprime_level[n];
        row.w_residual = std::abs(fit.value);
        row.wx_residual = std::abs(fit.slope);
        const double wxx_target = K * tp.k - tp.h * std::exp(s);
        row.wxx_residual = std::abs(fit.curvature - wxx_target);
        wxx_at_boundary[j] = fit.curvature;

        // v extended to the boundary from the first two valid nodes
        if (field.v_computed && !std::isnan(row.sprime)) {
            int j0 = -1, j1 = -1;
            for (int i = i_b; i <= field.i_hi; ++i) {
                if (field.is_valid(n, i) && !std::isnan(field.v[field.idx(n, i)])) {
                    if (j0 < 0) {
                        j0 = i;
                    } else {
                        j1 = i;
                        break;
                    }
                }
            }
            if (j1 > 0) {
                const double v0 = field.v[field.idx(n, j0)];
                const double v1 = field.v[field.idx(n, j1)];
                const double v_b =
                    v0 + (s - g.x(j0)) * (v1 - v0) / (g.x(j1) - g.x(j0));
                row.v_residual = std::abs(v_b + row.sprime);
                row.v_available = true;
            }
        }
        report.rows.push_back(row);
    }

    // sign identity: d/dt [w_xx(s(t),t)] = -h s'(t) e^{s(t)} > 0 for h > 0.
    // The per-sample curvature estimate is noisy (one-sided stencil on a
    // node-quantised boundary), so the trend is a least-squares slope over
    // a fixed fraction of the curve's span rather than a local difference.
    if (report.sign_check_applicable && curve.size() >= 3) {
        const double window =
            options.sign_window_frac * (curve.samples.back().t - curve.samples.front().t);
        std::map<int, std::size_t> row_by_level;
        for (std::size_t r = 0; r < report.rows.size(); ++r)
            row_by_level[report.rows[r].level] = r;
        for (std::size_t j = 0; j < curve.size(); ++j) {
            const auto it = row_by_level.find(curve.samples[j].level);
            if (it == row_by_level.end()) continue;
            BoundaryIdentityRow& row = report.rows[it->second];
            if (std::isnan(row.sprime)) continue;
            std::size_t lo = j, hi = j;
            while (lo > 0 && curve.samples[j].t - curve.samples[lo - 1].t <= window) --lo;
            while (hi + 1 < curve.size() && curve.samples[hi + 1].t - curve.samples[j].t <= window)
                ++hi;
            double sn = 0, st = 0, sy = 0, stt = 0, sty = 0;
            for (std::size_t m = lo; m <= hi; ++m) {
                if (std::isnan(wxx_at_boundary[m])) continue;
                const double dt = curve.samples[m].t - curve.samples[j].t;
                sn += 1.0;
                st += dt;
                sy += wxx_at_boundary[m];
                stt += dt * dt;
                sty += dt * wxx_at_boundary[m];
            }
            const double det = sn * stt - st * st;
            if (sn < 5.0 || det == 0.0) continue;
            row.sign_lhs = (sn * sty - st * sy) / det;
            row.sign_rhs = -tp.h * row.sprime * std::exp(row.s);
            row.sign_available = true;
            if (!(row.sign_lhs > 0.0)) ++report.sign_violations;
        }
    }

    // interior identities L w = Kk - h e^x and L w_xx = -h e^x
    const int width = field.width();
    const std::size_t rw = width;
    double max_lw = 0.0, max_lwxx = 0.0;
    for (int n = 2; n < g.nt - 1; ++n) {
        if (g.t(n) < t_lo) continue;
        const double s_n = field.s_level[n];
        for (int i = 2; i < field.i_hi - 1; ++i) {
            const std::size_t c = field.idx(n, i);
            if (!field.valid[c]) continue;
            if (!std::isnan(s_n) && g.x(i) < s_n + clearance) continue;
            // one extra cell of clearance so every stencil stays valid
            if (!field.valid[c - 1] || !field.valid[c + 1] || !field.valid[c - rw] ||
                !field.valid[c + rw])
                continue;
            const double ex = std::exp(g.x(i));
            {
                const double w_t = (field.w[c + rw] - field.w[c - rw]) / (2.0 * g.dt);
                const double l0w = field.w_xx[c] + (tp.k - tp.h - 1.0) * field.w_x[c] -
                                   tp.k * field.w[c];
                max_lw = std::max(max_lw, std::abs(l0w - w_t - (K * tp.k - tp.h * ex)));
            }
            {
                const double y_x = (field.w_xx[c + 1] - field.w_xx[c - 1]) / (2.0 * g.dx);
                const double y_xx = (field.w_xx[c - 1] - 2.0 * field.w_xx[c] +
                                     field.w_xx[c + 1]) /
                                    (g.dx * g.dx);
                const double y_t = (field.w_xx[c + rw] - field.w_xx[c - rw]) / (2.0 * g.dt);
                const double l0y = y_xx + (tp.k - tp.h - 1.0) * y_x - tp.k * field.w_xx[c];
                max_lwxx = std::max(max_lwxx, std::abs(l0y - y_t + tp.h * ex));
            }
        }
    }
    report.max_lw_residual = max_lw;
    report.max_lwxx_residual = max_lwxx;
    return report;
}

namespace {

double max_row_from(const std::vector<BoundaryIdentityRow>& rows, double t_lo, double t_hi,
                    double BoundaryIdentityRow::*member, bool need_v) {
    double worst = 0.0;
    for (const BoundaryIdentityRow& row : rows) {
        if (row.t < t_lo || row.t > t_hi) continue;
        if (need_v && !row.v_available) continue;
        worst = std::max(worst, row.*member);
    }
    return worst;
}

}  // namespace

double BoundaryIdentityReport::max_w_from(double t_lo, double t_hi) const {
    return max_row_from(rows, t_lo, t_hi, &BoundaryIdentityRow::w_residual, false);
}
double BoundaryIdentityReport::max_wx_from(double t_lo, double t_hi) const {
    return max_row_from(rows, t_lo, t_hi, &BoundaryIdentityRow::wx_residual, false);
}
double BoundaryIdentityReport::max_wxx_from(double t_lo, double t_hi) const {
    return max_row_from(rows, t_lo, t_hi, &BoundaryIdentityRow::wxx_residual, false);
}
double BoundaryIdentityReport::max_v_from(double t_lo, double t_hi) const {
    return max_row_from(rows, t_lo, t_hi, &BoundaryIdentityRow::v_residual, true);
}

VEquationResidual v_equation_residual(const DiagnosticField& field, const TransformedParams& tp,
                                      double t_lo, double clearance) {
    if (!field.v_computed) throw DiagnosticsError("v field not computed");
    const Grid& g = field.grid;
    if (t_lo < 0.0) t_lo = 4.0 * g.dt;
    if (clearance < 0.0) clearance = 2.0 * g.dx;
    const std::size_t rw = field.width();
    VEquationResidual out;
    double sum = 0.0;
    for (int n = 2; n < g.nt - 1; ++n) {
        if (g.t(n) < t_lo) continue;
        const double s_n = field.s_level[n];
        for (int i = 2; i < field.i_hi - 1; ++i) {
            const std::size_t c = field.idx(n, i);
            if (!std::isnan(s_n) && g.x(i) < s_n + clearance) continue;
            if (!field.valid[c] || !field.valid[c - 1] || !field.valid[c + 1] ||
                !field.valid[c - rw] || !field.valid[c + rw])
                continue;
            const double v_x = (field.v[c + 1] - field.v[c - 1]) / (2.0 * g.dx);
            const double v_xx =
                (field.v[c - 1] - 2.0 * field.v[c] + field.v[c + 1]) / (g.dx * g.dx);
            const double v_t = (field.v[c + rw] - field.v[c - rw]) / (2.0 * g.dt);
            const double w_xxx = (field.w_xx[c + 1] - field.w_xx[c - 1]) / (2.0 * g.dx);
            const double coeff = (tp.k - tp.h - 1.0) + 2.0 * w_xxx / field.w_xx[c];
            const double lwxx_over_wxx = -tp.h * std::exp(g.x(i)) / field.w_xx[c];
            const double residual =
                v_xx + coeff * v_x + lwxx_over_wxx * field.v[c] - v_t;
            out.max_residual = std::max(out.max_residual, std::abs(residual));
            sum += std::abs(residual);
            ++out.nodes;
        }
    }
    if (out.nodes > 0) out.mean_residual = sum / static_cast<double>(out.nodes);
    return out;
}

namespace {

struct SegmentPoint {
    double x, t;
};

struct Segment {
    SegmentPoint a, b;
};

long long quantize(double value, double scale) {
    return static_cast<long long>(std::llround(value / scale));
}

}  // namespace

std::vector<LevelCurve> trace_level_curves(const DiagnosticField& field,
                                           const std::vector<double>& alphas) {
    if (!field.v_computed) throw DiagnosticsError("v field not computed");
    const Grid& g = field.grid;
    std::vector<LevelCurve> curves;

    const double key_scale = 1e-9 * std::max(g.dx, g.dt);

    for (double alpha : alphas) {
        std::vector<Segment> segments;
        for (int n = 1; n + 1 < g.nt; ++n) {
            for (int i = 1; i + 1 < field.i_hi; ++i) {
                const std::size_t c00 = field.idx(n, i);
                const std::size_t c10 = field.idx(n, i + 1);
                const std::size_t c01 = field.idx(n + 1, i);
                const std::size_t c11 = field.idx(n + 1, i + 1);
                if (!field.valid[c00] || !field.valid[c10] || !field.valid[c01] ||
                    !field.valid[c11])
                    continue;
                const double v00 = field.v[c00], v10 = field.v[c10];
                const double v01 = field.v[c01], v11 = field.v[c11];
                const bool a00 = v00 > alpha, a10 = v10 > alpha;
                const bool a01 = v01 > alpha, a11 = v11 > alpha;
                const int code = (a00 ? 1 : 0) | (a10 ? 2 : 0) | (a11 ? 4 : 0) | (a01 ? 8 : 0);
                if (code == 0 || code == 15) continue;

                const double x0 = g.x(i), x1 = g.x(i + 1);
                const double t0 = g.t(n), t1 = g.t(n + 1);
                auto lerp = [alpha](double va, double vb, double pa, double pb) {
                    return pa + (alpha - va) / (vb - va) * (pb - pa);
                };
                // edge crossings: bottom, right, top, left
                SegmentPoint pb{}, pr{}, pt{}, pl{};
                const bool eb = a00 != a10, er = a10 != a11, et = a01 != a11, el = a00 != a01;
                if (eb) pb = {lerp(v00, v10, x0, x1), t0};
                if (er) pr = {x1, lerp(v10, v11, t0, t1)};
                if (et) pt = {lerp(v01, v11, x0, x1), t1};
                if (el) pl = {x0, lerp(v00, v01, t0, t1)};

                switch (code) {
                    case 1: case 14: segments.push_back({pl, pb}); break;
                    case 2: case 13: segments.push_back({pb, pr}); break;
                    case 3: case 12: segments.push_back({pl, pr}); break;
                    case 4: case 11: segments.push_back({pr, pt}); break;
                    case 6: case 9:  segments.push_back({pb, pt}); break;
                    case 7: case 8:  segments.push_back({pl, pt}); break;
                    case 5: case 10: {
                        // saddle: disambiguate with the cell centre
                        const double centre = 0.25 * (v00 + v10 + v01 + v11);
                        const bool centre_above = centre > alpha;
                        if ((code == 5) == centre_above) {
                            segments.push_back({pl, pt});
                            segments.push_back({pb, pr});
                        } else {
                            segments.push_back({pl, pb});
                            segments.push_back({pr, pt});
                        }
                        break;
                    }
                    default: break;
                }
            }
        }
        if (segments.empty()) continue;

        // chain segments into polylines by shared endpoints
        std::map<std::pair<long long, long long>, std::vector<std::size_t>> by_endpoint;
        auto key = [&](const SegmentPoint& p) {
            return std::make_pair(quantize(p.x, key_scale), quantize(p.t, key_scale));
        };
        for (std::size_t si = 0; si < segments.size(); ++si) {
            by_endpoint[key(segments[si].a)].push_back(si);
            by_endpoint[key(segments[si].b)].push_back(si);
        }
        std::vector<bool> used(segments.size(), false);
        for (std::size_t start = 0; start < segments.size(); ++start) {
            if (used[start]) continue;
            std::vector<SegmentPoint> chain{segments[start].a, segments[start].b};
            used[start] = true;
            for (int dir = 0; dir < 2; ++dir) {
                while (true) {
                    const SegmentPoint tip = dir == 0 ? chain.back() : chain.front();
                    const auto it = by_endpoint.find(key(tip));
                    std::size_t next = segments.size();
                    if (it != by_endpoint.end())
                        for (std::size_t cand : it->second)
                            if (!used[cand]) {
                                next = cand;
                                break;
                            }
                    if (next == segments.size()) break;
                    used[next] = true;
                    const bool from_a = key(segments[next].a) == key(tip);
                    const SegmentPoint far = from_a ? segments[next].b : segments[next].a;
                    if (dir == 0)
                        chain.push_back(far);
                    else
                        chain.insert(chain.begin(), far);
                }
            }
            LevelCurve curve;
            curve.alpha = alpha;
            curve.points.reserve(chain.size());
            for (const SegmentPoint& p : chain) curve.points.emplace_back(p.x, p.t);
            const double eps_t = 1e-12 * std::max(1.0, g.t_max);
            bool nondecreasing = true, nonincreasing = true;
            for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
                const double step = chain[j + 1].t - chain[j].t;
                if (step < -eps_t) nondecreasing = false;
                if (step > eps_t) nonincreasing = false;
            }
            curve.t_monotone = nondecreasing || nonincreasing;
            curves.push_back(std::move(curve));
        }
    }
    return curves;
}

std::string field_csv(const DiagnosticField& field) {
    const Grid& g = field.grid;
    io::CsvWriter csv({"t", "x", "w", "w_x", "w_xx", "w_xt", "v", "valid"});
    for (int n = 1; n < g.nt; ++n) {
        for (int i = 0; i <= field.i_hi; ++i) {
            if (!field.is_in_cd(n, i)) continue;
            const std::size_t c = field.idx(n, i);
            csv.add_cell(g.t(n));
            csv.add_cell(g.x(i));
            csv.add_cell(field.w[c]);
            csv.add_cell(field.w_x[c]);
            csv.add_cell(field.w_xx[c]);
            csv.add_cell(field.w_xt[c]);
            csv.add_cell(field.v[c]);
            csv.add_cell(static_cast<long long>(field.valid[c] ? 1 : 0));
            csv.end_row();
        }
    }
    return csv.str();
}

}  // namespace putlab
