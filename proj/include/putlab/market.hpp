#ifndef PUTLAB_MARKET_HPP
#define PUTLAB_MARKET_HPP

#include <stdexcept>
#include <string>

namespace putlab {

// Contract economics. Rates are continuously compounded per year,
// times are year fractions.
struct MarketParams {
    double r;       // risk-free rate, >= 0
    double q;       // continuous dividend yield, >= 0
    double sigma;   // volatility, > 0
    double strike;  // > 0
    double expiry;  // T_F in years, > 0

    void validate() const;
};

// Constants of the log-price / reversed-time formulation:
//   S = e^x, T = T_F - 2t/sigma^2, k = 2r/sigma^2, h = 2q/sigma^2.
struct TransformedParams {
    double k;
    double h;
    double t_max;  // sigma^2 * T_F / 2
    double d;      // log(strike)

    double to_calendar(double t, double sigma, double expiry) const {
        return expiry - 2.0 * t / (sigma * sigma);
    }
};

// Convexity regime of the early exercise boundary.
//   ZeroDividend : q = 0, convexity known
//   ProvenConvex : q > 0 and q + sigma^2/2 <= r, convexity known
//   Open         : q > 0 and q <= r < q + sigma^2/2
//   NonConvex    : r < q, convexity known to fail
enum class Regime { ZeroDividend, ProvenConvex, Open, NonConvex };

const char* to_string(Regime regime);

TransformedParams transform(const MarketParams& params);

Regime classify_regime(const MarketParams& params);

// max(0, K - S)
double payoff(double S, double K);

// Limit of the exercise boundary at expiry: min{K, (r/q)K}, with the
// q = 0 limit equal to K.
double boundary_at_expiry(const MarketParams& params);

// Black-Scholes European put with continuous dividend yield, evaluated
// at calendar time T (value date T, expiry at params.expiry).
double european_put(const MarketParams& params, double S, double T);

double norm_cdf(double x);

}  // namespace putlab

#endif
