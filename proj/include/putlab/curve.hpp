#ifndef PUTLAB_CURVE_HPP
#define PUTLAB_CURVE_HPP

#include <vector>

namespace putlab {

enum class CurveSource { Pde, Tree, Asymptotic };

const char* to_string(CurveSource source);

// One boundary sample in both coordinate systems:
//   X = e^s,  T = T_F - 2t/sigma^2.
struct BoundarySample {
    double t;   // transformed time
    double s;   // log-price boundary s(t)
    double T;   // calendar time
    double X;   // price boundary X_f(T)
    int level;  // producing grid/tree level
};

// Sampled early exercise boundary, t strictly increasing.
struct BoundaryCurve {
    CurveSource source = CurveSource::Pde;
    std::vector<BoundarySample> samples;
    int skipped_levels = 0;
    double noise = 0.0;      // extraction noise estimate in s units
    double t_spacing = 0.0;  // nominal sample spacing in t

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
};

// Derivative s'(t) per sample: least-squares quadratic over the samples
// within window_frac of the curve's t span on each side (at least five
// samples), clamped to <= 0 since the boundary is nonincreasing in t.
// The window must span several node hops of the staircase-quantised
// curve even where the boundary is slow, hence the wide default.
std::vector<double> curve_derivative(const BoundaryCurve& curve, double window_frac = 0.1);

// Adjacent-pair averages; used to cancel the odd/even oscillation of
// tree boundaries.
BoundaryCurve pairwise_average(const BoundaryCurve& curve);

}  // namespace putlab

#endif
