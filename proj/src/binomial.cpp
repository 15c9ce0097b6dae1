#include "putlab/binomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace putlab {

TreeSpec TreeSpec::make(const MarketParams& params, int steps) {
    params.validate();
    if (steps < 1) throw std::invalid_argument("tree needs at least one step");
    TreeSpec spec;
    spec.steps = steps;
    spec.dt = params.expiry / steps;
    spec.up = std::exp(params.sigma * std::sqrt(spec.dt));
    spec.down = 1.0 / spec.up;
    spec.prob_up = (std::exp((params.r - params.q) * spec.dt) - spec.down) / (spec.up - spec.down);
    spec.step_discount = std::exp(-params.r * spec.dt);
    if (!(spec.prob_up > 0.0 && spec.prob_up < 1.0))
        throw std::invalid_argument(
            "risk-neutral probability outside (0,1); increase the step count");
    return spec;
}

namespace {

// node prices S0 * up^m for m in [-steps, steps]
std::vector<double> node_prices(double S0, const TreeSpec& spec) {
    std::vector<double> S(2 * spec.steps + 1);
    for (int m = -spec.steps; m <= spec.steps; ++m)
        S[m + spec.steps] = S0 * std::pow(spec.up, m);
    return S;
}

double tree_value(const MarketParams& params, double S0, int steps, bool american) {
    const TreeSpec spec = TreeSpec::make(params, steps);
    const double K = params.strike;
    const std::vector<double> S = node_prices(S0, spec);
    std::vector<double> value(steps + 1);
    for (int j = 0; j <= steps; ++j) value[j] = payoff(S[2 * (steps - j)], K);
    for (int level = steps - 1; level >= 0; --level) {
        for (int j = 0; j <= level; ++j) {
            double v = spec.step_discount *
                       (spec.prob_up * value[j] + (1.0 - spec.prob_up) * value[j + 1]);
            if (american) v = std::max(v, payoff(S[steps + level - 2 * j], K));
            value[j] = v;
        }
    }
    return value[0];
}

}  // namespace

double crr_price(const MarketParams& params, double S0, int steps) {
    if (!(S0 >= 0.0)) throw std::invalid_argument("spot must be >= 0");
    return tree_value(params, S0, steps, true);
}

double crr_european_price(const MarketParams& params, double S0, int steps) {
    if (!(S0 >= 0.0)) throw std::invalid_argument("spot must be >= 0");
    return tree_value(params, S0, steps, false);
}

BoundaryCurve crr_boundary(const MarketParams& params, int steps) {
    const TreeSpec spec = TreeSpec::make(params, steps);
    const double K = params.strike;
    const double s2 = params.sigma * params.sigma;
    const std::vector<double> S = node_prices(K, spec);  // lattice rooted at the strike

    std::vector<double> value(steps + 1);
    for (int j = 0; j <= steps; ++j) value[j] = payoff(S[2 * (steps - j)], K);

    // levels walked from the last decision level toward the root,
    // which is ascending transformed time
    std::vector<BoundarySample> samples;
    samples.reserve(steps);
    int skipped = 0;
    for (int level = steps - 1; level >= 0; --level) {
        double boundary = -1.0;
        for (int j = 0; j <= level; ++j) {
            const double price = S[steps + level - 2 * j];
            const double cont = spec.step_discount *
                                (spec.prob_up * value[j] + (1.0 - spec.prob_up) * value[j + 1]);
            const double exer = payoff(price, K);
            value[j] = std::max(cont, exer);
            if (exer > 0.0 && exer >= cont && boundary < 0.0) boundary = price;
        }
        if (boundary < 0.0) {
            ++skipped;
            continue;
        }
        BoundarySample sample;
        sample.level = level;
        sample.T = level * spec.dt;
        sample.X = boundary;
        sample.t = s2 * (params.expiry - sample.T) / 2.0;
        sample.s = std::log(boundary);
        samples.push_back(sample);
    }

    BoundaryCurve curve;
    curve.source = CurveSource::Tree;
    curve.samples = std::move(samples);
    curve.skipped_levels = skipped;
    // adjacent lattice nodes at a level are a factor up^2 apart in price
    curve.noise = 2.0 * 2.0 * params.sigma * std::sqrt(spec.dt);
    curve.t_spacing = s2 * spec.dt / 2.0;
    return curve;
}

}  // namespace putlab
