#ifndef PUTLAB_DIAGNOSTICS_HPP
#define PUTLAB_DIAGNOSTICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "putlab/boundary.hpp"
#include "putlab/curve.hpp"
#include "putlab/market.hpp"
#include "putlab/pde.hpp"

namespace putlab {

// w = u - (K - e^x) and its derivatives on C_d = {(x,t): s(t) < x < d},
// with v = w_xt / w_xx. Arrays cover grid columns [0, i_hi] (everything
// left of d plus a small margin) for levels 1..nt-1; in_cd marks nodes
// inside C_d, valid additionally requires two cells of clearance from
// s(t) at every time level the t-stencil touches, two cells from d, and
// (after compute_v_field) w_xx >= wxx_floor.
struct DiagnosticField {
    Grid grid;
    double d = 0.0;
    double wxx_floor = 0.0;
    int i_hi = 0;  // last stored column
    BoundaryCurve curve;
    std::vector<double> s_level;       // per level, NaN where no sample
    std::vector<double> sprime_level;  // smoothed s'(t) per level, NaN where no sample
    std::vector<double> w, w_x, w_xx, w_xt, v;
    std::vector<std::uint8_t> in_cd, valid;
    int invalidated_wxx = 0;  // interior nodes dropped by the w_xx floor
    bool v_computed = false;

    int width() const { return i_hi + 1; }
    std::size_t idx(int n, int i) const { return static_cast<std::size_t>(n) * width() + i; }
    bool is_valid(int n, int i) const { return valid[idx(n, i)] != 0; }
    bool is_in_cd(int n, int i) const { return in_cd[idx(n, i)] != 0; }
};

class DiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Builds w and its derivatives. Throws DiagnosticsError when C_d is empty.
// wxx_floor < 0 picks 1e-4 * strike.
DiagnosticField compute_w_field(const PriceSurface& surface, const TransformedParams& tp,
                                const MarketParams& params, const BoundaryCurve& curve,
                                double wxx_floor = -1.0);

// Fills v = w_xt / w_xx on the valid mask, dropping nodes whose w_xx is
// below the floor, and returns the same field.
DiagnosticField& compute_v_field(DiagnosticField& field);

struct BoundaryIdentityRow {
    int level = 0;
    double t = 0.0;
    double s = 0.0;
    double sprime = 0.0;
    double w_residual = 0.0;    // w(s,t) = 0
    double wx_residual = 0.0;   // w_x(s,t) = 0
    double wxx_residual = 0.0;  // w_xx(s,t) = Kk - h e^s
    double v_residual = 0.0;    // v(s,t) = -s'(t)
    bool v_available = false;
    double sign_lhs = 0.0;  // d/dt of w_xx along the boundary
    double sign_rhs = 0.0;  // -h s'(t) e^s
    bool sign_available = false;
};

struct BoundaryIdentityReport {
    std::vector<BoundaryIdentityRow> rows;
    bool sign_check_applicable = false;  // h > 0
    int sign_violations = 0;             // sign_lhs <= 0 among available rows
    double max_lwxx_residual = 0.0;      // L w_xx = -h e^x on the interior
    double max_lw_residual = 0.0;        // L w   = Kk - h e^x on the interior

    // maxima over rows with t in [t_lo, t_hi]; derivative estimates at the
    // curve ends are one-sided, so studies usually trim both ends
    double max_w_from(double t_lo, double t_hi = 1e300) const;
    double max_wx_from(double t_lo, double t_hi = 1e300) const;
    double max_wxx_from(double t_lo, double t_hi = 1e300) const;
    double max_v_from(double t_lo, double t_hi = 1e300) const;
};

// Where the interior identities are sampled. Higher x-derivatives of w
// blow up toward the free boundary and toward t = 0, so a refinement
// study must hold the evaluation region fixed instead of letting it
// shrink with the mesh.
struct IdentityOptions {
    double interior_t_lo = -1.0;       // < 0 picks 4*dt
    double interior_clearance = -1.0;  // distance kept from s(t); < 0 picks 2*dx
    double sign_window_frac = 0.1;     // t-span fraction for the curvature trend
};

BoundaryIdentityReport boundary_identity_report(const DiagnosticField& field,
                                                const BoundaryCurve& curve,
                                                const TransformedParams& tp,
                                                const MarketParams& params,
                                                const IdentityOptions& options = {});

struct VEquationResidual {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    long nodes = 0;
};

// Residual of v_t = v_xx + ((k-h-1) + 2 w_xxx/w_xx) v_x + (L w_xx / w_xx) v
// on well-separated interior nodes, with L w_xx taken at its analytic
// value -h e^x. t_lo and clearance as in IdentityOptions.
VEquationResidual v_equation_residual(const DiagnosticField& field, const TransformedParams& tp,
                                      double t_lo = -1.0, double clearance = -1.0);

struct LevelCurve {
    double alpha = 0.0;
    std::vector<std::pair<double, double>> points;  // (x, t)
    bool t_monotone = false;
};

// Marching-squares contours of v restricted to the valid mask. A constant
// field yields no curves (strict above/below classification).
std::vector<LevelCurve> trace_level_curves(const DiagnosticField& field,
                                           const std::vector<double>& alphas);

// CSV dump of the C_d region, header `t,x,w,w_x,w_xx,w_xt,v,valid`.
std::string field_csv(const DiagnosticField& field);

}  // namespace putlab

#endif
