#ifndef PUTLAB_BINOMIAL_HPP
#define PUTLAB_BINOMIAL_HPP

#include "putlab/curve.hpp"
#include "putlab/market.hpp"

namespace putlab {

// Cox-Ross-Rubinstein lattice constants, up = 1/down.
struct TreeSpec {
    int steps;
    double up, down, prob_up, step_discount, dt;

    // Throws when the risk-neutral probability falls outside (0,1);
    // the message suggests a larger step count.
    static TreeSpec make(const MarketParams& params, int steps);
};

// American put by backward induction.
double crr_price(const MarketParams& params, double S0, int steps);

// European put on the same lattice; lower bound for the American value.
double crr_european_price(const MarketParams& params, double S0, int steps);

// Per level, the highest lattice node where immediate exercise is at
// least as good as continuation (ties exercise, zero payoff excluded).
// The lattice is rooted at the strike. Levels without an exercise node
// are skipped.
BoundaryCurve crr_boundary(const MarketParams& params, int steps);

}  // namespace putlab

#endif
