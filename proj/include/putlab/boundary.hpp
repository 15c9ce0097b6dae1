#ifndef PUTLAB_BOUNDARY_HPP
#define PUTLAB_BOUNDARY_HPP

#include <optional>
#include <string>
#include <vector>

#include "putlab/curve.hpp"
#include "putlab/market.hpp"
#include "putlab/pde.hpp"

namespace putlab {

class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Free boundary from the active sets of a solved surface. Per time level
// n >= 1 the largest exercised node is refined by interpolating u - psi
// to its zero crossing; levels without an exercised node are skipped.
// Throws ExtractionError when no level yields a sample.
BoundaryCurve extract_boundary(const PriceSurface& surface, const MarketParams& params);

struct MonotonicityReport {
    bool pass = true;
    int violations = 0;
    double worst_increase = 0.0;  // max of s_{j+1} - s_j
    double worst_t = 0.0;
    double mono_tol = 0.0;
};

// s must be nonincreasing in t (X_f increasing in T). mono_tol < 0 picks
// curve.noise / 4, which is dx/2 for PDE curves.
MonotonicityReport monotonicity_check(const BoundaryCurve& curve, double mono_tol = -1.0);

struct PastingResiduals {
    std::vector<double> t;
    std::vector<double> value_residual;       // |u(s,t) - (K - e^s)|
    std::vector<double> derivative_residual;  // |u_x(s+,t) + e^s|
    double max_value_residual = 0.0;
    double max_derivative_residual = 0.0;

    // maxima restricted to t >= t_lo
    double max_value_from(double t_lo) const;
    double max_derivative_from(double t_lo) const;
};

PastingResiduals smooth_pasting_residual(const PriceSurface& surface, const BoundaryCurve& curve,
                                         const MarketParams& params);

enum class ConvexityCoordinate { CalendarXofT, TransformedSofT };

const char* to_string(ConvexityCoordinate coordinate);

struct ConvexityOptions {
    ConvexityCoordinate coordinate = ConvexityCoordinate::CalendarXofT;
    double tol_scale = 1.0;
    bool presmooth = false;          // 3-point moving average, opt-in
    double exclude_t_below = -1.0;   // < 0 picks 4 * curve.t_spacing
};

struct ConvexityVerdict {
    bool convex = false;
    double min_second_difference = 0.0;
    std::vector<std::pair<double, double>> violation_intervals;  // (t_lo, t_hi)
    double tolerance_used = 0.0;
    ConvexityCoordinate coordinate = ConvexityCoordinate::CalendarXofT;
    int samples_used = 0;
};

// Second central differences of the chosen coordinate on the uniformly
// spaced part of the curve; convex iff no difference falls below
// -tol_scale * noise (noise rescaled to price units for X of T).
ConvexityVerdict convexity_check(const BoundaryCurve& curve, const ConvexityOptions& options = {});

struct RegimeReport {
    MarketParams params{};
    Regime regime = Regime::Open;
    bool solved = false;
    std::string error;
    ConvexityVerdict calendar;     // X_f(T), the theorem's coordinate
    ConvexityVerdict transformed;  // s(t), recorded as an observation
};

struct ScanGridSpec {
    int nx = 1601;
    int nt = 1600;
};

// Solve + extract + convexity check per parameter set; failures are
// recorded per row and do not abort the sweep.
std::vector<RegimeReport> concavity_scan(const std::vector<MarketParams>& sets,
                                         const ScanGridSpec& grid_spec,
                                         const SolverConfig& solver = {},
                                         const ConvexityOptions& options = {}, int jobs = 1);

// CSV, header `T,X_f,t,s,source`.
std::string boundary_csv(const BoundaryCurve& curve);

}  // namespace putlab

#endif
