#include "putlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "putlab/io.hpp"

namespace putlab {

AsymptoticSpec AsymptoticSpec::make(const MarketParams& params) {
    params.validate();
    if (params.r < params.q)
        throw std::invalid_argument("no expansion branch for r < q");
    AsymptoticSpec spec;
    spec.params = params;
    const double s2 = params.sigma * params.sigma;
    if (params.q < params.r) {
        spec.branch = EvansBranch::SubDividend;
        const double diff = params.r - params.q;
        spec.validity_tau_max = s2 / (8.0 * std::numbers::pi * std::numbers::e * diff * diff);
    } else {
        if (params.q == 0.0)
            throw std::invalid_argument("equal branch undefined for r = q = 0");
        spec.branch = EvansBranch::Equal;
        spec.validity_tau_max =
            1.0 / (4.0 * std::sqrt(std::numbers::pi) * std::numbers::e * params.q);
    }
    return spec;
}

namespace {

double log_argument(const AsymptoticSpec& spec, double tau) {
    const MarketParams& p = spec.params;
    if (spec.branch == EvansBranch::SubDividend) {
        const double diff = p.r - p.q;
        return p.sigma * p.sigma / (8.0 * std::numbers::pi * diff * diff * tau);
    }
    return 1.0 / (4.0 * std::sqrt(std::numbers::pi) * p.q * tau);
}

}  // namespace

double evans_boundary(const AsymptoticSpec& spec, double tau) {
    if (!(tau > 0.0) || tau > spec.validity_tau_max)
        throw std::domain_error("tau outside the expansion's validity window");
    const MarketParams& p = spec.params;
    const double gap =
        p.sigma * p.strike * std::sqrt(tau * std::log(log_argument(spec, tau)));
    return p.strike - gap;
}

BoundaryCurve evans_curve(const AsymptoticSpec& spec, const std::vector<double>& taus) {
    // transformed t grows with tau, so ascending tau is ascending t
    std::vector<double> sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    const double s2 = spec.params.sigma * spec.params.sigma;
    BoundaryCurve curve;
    curve.source = CurveSource::Asymptotic;
    curve.t_spacing = sorted.size() > 1 ? s2 * (sorted[1] - sorted[0]) / 2.0 : 0.0;
    for (double tau : sorted) {
        BoundarySample sample;
        sample.level = static_cast<int>(curve.samples.size());
        sample.X = evans_boundary(spec, tau);
        sample.s = std::log(sample.X);
        sample.T = spec.params.expiry - tau;
        sample.t = s2 * tau / 2.0;
        curve.samples.push_back(sample);
    }
    return curve;
}

NearExpiryComparison compare_near_expiry(const BoundaryCurve& curve, const AsymptoticSpec& spec,
                                         double tau_lo, double tau_hi) {
    if (!(tau_lo > 0.0) || !(tau_hi > tau_lo))
        throw std::invalid_argument("need 0 < tau_lo < tau_hi");
    const double hi = std::min(tau_hi, spec.validity_tau_max);
    const double T_F = spec.params.expiry;
    const double K = spec.params.strike;

    NearExpiryComparison out;
    for (const BoundarySample& sample : curve.samples) {
        const double tau = T_F - sample.T;
        if (tau < tau_lo || tau > hi) continue;
        const double reference = evans_boundary(spec, tau);
        out.tau.push_back(tau);
        out.X_evans.push_back(reference);
        out.X_extracted.push_back(sample.X);
        out.rel_gap.push_back(std::abs(sample.X - reference) / (K - reference));
    }
    if (out.tau.empty())
        throw std::invalid_argument("curve does not overlap the comparison window");
    double sum = 0.0;
    for (double gap : out.rel_gap) {
        out.max_rel_gap = std::max(out.max_rel_gap, gap);
        sum += gap;
    }
    out.mean_rel_gap = sum / static_cast<double>(out.rel_gap.size());
    return out;
}

std::string near_expiry_csv(const NearExpiryComparison& comparison) {
    io::CsvWriter csv({"tau", "X_evans", "X_extracted", "rel_gap"});
    for (std::size_t j = 0; j < comparison.tau.size(); ++j) {
        csv.add_cell(comparison.tau[j]);
        csv.add_cell(comparison.X_evans[j]);
        csv.add_cell(comparison.X_extracted[j]);
        csv.add_cell(comparison.rel_gap[j]);
        csv.end_row();
    }
    return csv.str();
}

}  // namespace putlab
