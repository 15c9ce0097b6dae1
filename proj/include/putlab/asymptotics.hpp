#ifndef PUTLAB_ASYMPTOTICS_HPP
#define PUTLAB_ASYMPTOTICS_HPP

#include <vector>

#include "putlab/curve.hpp"
#include "putlab/market.hpp"

namespace putlab {

// Near-maturity expansion branch:
//   SubDividend (0 <= q < r):  X_f ~ K - sigma K sqrt(tau log(sigma^2 / (8 pi (r-q)^2 tau)))
//   Equal       (0 < q = r):   X_f ~ K - sigma K sqrt(tau log(1 / (4 sqrt(pi) q tau)))
enum class EvansBranch { SubDividend, Equal };

struct AsymptoticSpec {
    EvansBranch branch;
    MarketParams params;
    double validity_tau_max;  // largest tau with log factor >= 1

    // Throws for r < q (no formula) and for r = q = 0.
    static AsymptoticSpec make(const MarketParams& params);
};

// Branch formula at time-to-expiry tau. Calls outside (0, validity_tau_max]
// are domain errors rather than clamped.
double evans_boundary(const AsymptoticSpec& spec, double tau);

// Curve sampled from the formula itself, mostly for self-tests.
BoundaryCurve evans_curve(const AsymptoticSpec& spec, const std::vector<double>& taus);

struct NearExpiryComparison {
    std::vector<double> tau;
    std::vector<double> X_evans;
    std::vector<double> X_extracted;
    std::vector<double> rel_gap;  // |X_extracted - X_evans| / (K - X_evans)
    double max_rel_gap = 0.0;
    double mean_rel_gap = 0.0;
};

// Per curve sample with T_F - T inside [tau_lo, tau_hi] (intersected with
// the validity window), the relative gap against the branch formula.
// Throws when the overlap is empty.
NearExpiryComparison compare_near_expiry(const BoundaryCurve& curve, const AsymptoticSpec& spec,
                                         double tau_lo, double tau_hi);

// CSV, header `tau,X_evans,X_extracted,rel_gap`.
std::string near_expiry_csv(const NearExpiryComparison& comparison);

}  // namespace putlab

#endif
