#include "putlab/market.hpp"

#include <algorithm>
#include <cmath>

namespace putlab {

void MarketParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be > 0");
    if (!(expiry > 0.0)) throw std::invalid_argument("expiry must be > 0");
    if (!(r >= 0.0)) throw std::invalid_argument("r must be >= 0");
    if (!(q >= 0.0)) throw std::invalid_argument("q must be >= 0");
}

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::ZeroDividend: return "ZERO_DIVIDEND";
        case Regime::ProvenConvex: return "PROVEN_CONVEX";
        case Regime::Open: return "OPEN";
        case Regime::NonConvex: return "NON_CONVEX";
    }
    return "UNKNOWN";
}

TransformedParams transform(const MarketParams& params) {
    params.validate();
    const double s2 = params.sigma * params.sigma;
    TransformedParams tp;
    tp.k = 2.0 * params.r / s2;
    tp.h = 2.0 * params.q / s2;
    tp.t_max = s2 * params.expiry / 2.0;
    tp.d = std::log(params.strike);
    return tp;
}

Regime classify_regime(const MarketParams& params) {
    params.validate();
    if (params.q == 0.0) return Regime::ZeroDividend;
    if (params.r < params.q) return Regime::NonConvex;
    if (params.q + params.sigma * params.sigma / 2.0 <= params.r)
        return Regime::ProvenConvex;
    return Regime::Open;
}

double payoff(double S, double K) {
    return std::max(0.0, K - S);
}

double boundary_at_expiry(const MarketParams& params) {
    params.validate();
    if (params.q == 0.0 || params.r >= params.q) return params.strike;
    return params.r / params.q * params.strike;
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double european_put(const MarketParams& params, double S, double T) {
    params.validate();
    if (!(S > 0.0)) throw std::invalid_argument("spot must be > 0");
    const double tau = params.expiry - T;
    if (tau < 0.0) throw std::invalid_argument("T beyond expiry");
    if (tau == 0.0) return payoff(S, params.strike);
    const double sig_sqrt = params.sigma * std::sqrt(tau);
    const double d1 = (std::log(S / params.strike) +
                       (params.r - params.q + 0.5 * params.sigma * params.sigma) * tau) /
                      sig_sqrt;
    const double d2 = d1 - sig_sqrt;
    return params.strike * std::exp(-params.r * tau) * norm_cdf(-d2) -
           S * std::exp(-params.q * tau) * norm_cdf(-d1);
}

}  // namespace putlab
