#include "qrev/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace qrev {

CompensationResult find_tr(const EchoTrace& trace, bool refine) {
    const std::size_t r = trace.reversal_index;
    const std::size_t last = trace.times.size() - 1;
    if (trace.p.size() != trace.times.size() || r >= last) {
        throw std::invalid_argument("find_tr: trace does not cover [T/2, T]");
    }
    const double period = trace.period;
    CompensationResult out;
    std::size_t best = r;
    for (std::size_t i = r + 1; i <= last; ++i) {
        if (trace.p[i] > trace.p[best]) best = i;
    }
    out.t_r = trace.times[best];
    out.p_max = trace.p[best];
    if (trace.p[last] >= 1.0 - 1e-12) {
        best = last;
        out.t_r = period;
        out.p_max = trace.p[last];
    } else if (refine && best > r && best < last) {
        const double y0 = trace.p[best - 1];
        const double y1 = trace.p[best];
        const double y2 = trace.p[best + 1];
        const double curvature = y0 - 2.0 * y1 + y2;
        if (curvature < 0.0) {
            const double shift = 0.5 * (y0 - y2) / curvature;
            const double h = trace.times[best + 1] - trace.times[best];
            out.t_r = std::clamp(trace.times[best] + shift * h, 0.5 * period, period);
            out.p_max = std::min(1.0, y1 - 0.25 * (y0 - y2) * shift);
        }
    }
    out.t_r_over_T = std::clamp(out.t_r / period, 0.5, 1.0);
    return out;
}

CompensationResult average_results(std::span<const CompensationResult> results) {
    if (results.empty()) throw std::invalid_argument("average_results: no results");
    CompensationResult out;
    const double n = static_cast<double>(results.size());
    out.n_realizations = results.size();
    for (const auto& r : results) {
        out.t_r += r.t_r;
        out.t_r_over_T += r.t_r_over_T;
        out.p_max += r.p_max;
    }
    // sum first: the mean of values in [0.5, 1] stays in [0.5, 1]
    out.t_r /= n;
    out.t_r_over_T /= n;
    out.p_max /= n;
    if (results.size() > 1) {
        double ss = 0.0;
        for (const auto& r : results) ss += std::pow(r.t_r_over_T - out.t_r_over_T, 2);
        out.spread = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

Lambda lambda_for(PreparationKind kind, double epsilon_prep, double epsilon_evol) {
    switch (kind) {
        case PreparationKind::coherent:
        case PreparationKind::random_superposition: return {0.0, LambdaFlag::small};
        case PreparationKind::eigenstate: return {std::numeric_limits<double>::infinity(), LambdaFlag::infinite};
        case PreparationKind::ergodic:
            if (epsilon_prep == 0.0) return {std::numeric_limits<double>::infinity(), LambdaFlag::infinite};
            return {epsilon_evol / epsilon_prep, LambdaFlag::numeric};
    }
    return {};
}

std::string_view lambda_label(const Lambda& lambda) {
    switch (lambda.flag) {
        case LambdaFlag::small: return "lambda<<1";
        case LambdaFlag::infinite: return "inf";
        case LambdaFlag::numeric: break;
    }
    return "numeric";
}

ScalingCurve scaling_curve(std::span<const ScalingPoint> points, double relative_tolerance) {
    std::vector<std::pair<double, double>> keyed;  // (lambda, f)
    keyed.reserve(points.size());
    for (const auto& p : points) {
        const double lambda = p.lambda.flag == LambdaFlag::small      ? 0.0
                              : p.lambda.flag == LambdaFlag::infinite ? std::numeric_limits<double>::infinity()
                                                                       : p.lambda.value;
        keyed.emplace_back(lambda, p.t_r_over_T);
    }
    std::sort(keyed.begin(), keyed.end());

    ScalingCurve curve;
    std::vector<std::vector<double>> members;
    for (const auto& [lambda, f] : keyed) {
        const bool same = !curve.bins.empty() &&
                          (lambda == curve.bins.back().lambda ||
                           (std::isfinite(lambda) &&
                            lambda - curve.bins.back().lambda <= relative_tolerance * std::max(1.0, lambda)));
        if (!same) {
            curve.bins.push_back({lambda, 0.0, 0.0, 0});
            members.emplace_back();
        }
        members.back().push_back(f);
    }
    if (curve.bins.size() < 2) throw std::invalid_argument("scaling_curve: need at least 2 distinct lambda values");
    for (std::size_t b = 0; b < curve.bins.size(); ++b) {
        const auto& m = members[b];
        const double n = static_cast<double>(m.size());
        const double mean = std::accumulate(m.begin(), m.end(), 0.0) / n;
        double ss = 0.0;
        for (double f : m) ss += (f - mean) * (f - mean);
        curve.bins[b].f_mean = mean;
        curve.bins[b].f_std = m.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        curve.bins[b].n = m.size();
    }
    for (std::size_t b = 1; b < curve.bins.size(); ++b) {
        const auto& prev = curve.bins[b - 1];
        const auto& cur = curve.bins[b];
        if (cur.f_mean > prev.f_mean + std::max(prev.f_std, cur.f_std) + 1e-12) curve.monotone = false;
    }
    return curve;
}

LambdaStar estimate_lambda_star(const ScalingCurve& curve, double plateau_tolerance) {
    std::vector<ScalingBin> bins;
    for (const auto& b : curve.bins) {
        if (std::isfinite(b.lambda)) bins.push_back(b);
    }
    auto in_plateau = [&](const ScalingBin& b) { return std::abs(b.f_mean - 0.5) <= plateau_tolerance; };
    if (bins.empty() || !in_plateau(bins.back())) {
        throw NumericalError(fmt::format(
            "estimate_lambda_star: the curve does not end on the 0.5 plateau (last bin f = {:.3f} at lambda = {}); "
            "extend the lambda range",
            bins.empty() ? 0.0 : bins.back().f_mean, bins.empty() ? 0.0 : bins.back().lambda));
    }
    std::size_t k = bins.size() - 1;
    while (k > 0 && in_plateau(bins[k - 1])) --k;
    if (k == 0) {
        throw NumericalError("estimate_lambda_star: every bin lies on the plateau; sample smaller lambda");
    }
    const ScalingBin& a = bins[k - 1];
    const ScalingBin& b = bins[k];
    LambdaStar out;
    out.plateau_first_bin = k;
    out.uncertainty = 0.5 * (b.lambda - a.lambda);
    double onset = std::numeric_limits<double>::quiet_NaN();
    if (k >= 2) {
        const ScalingBin& z = bins[k - 2];
        const double slope = (a.f_mean - z.f_mean) / (a.lambda - z.lambda);
        if (slope < 0.0) onset = a.lambda + (0.5 - a.f_mean) / slope;
    }
    if (std::isnan(onset)) {
        // entry into the tolerance band by interpolation between a and b
        const double level = a.f_mean > 0.5 ? 0.5 + plateau_tolerance : 0.5 - plateau_tolerance;
        const double df = b.f_mean - a.f_mean;
        onset = df != 0.0 ? a.lambda + (level - a.f_mean) / df * (b.lambda - a.lambda) : b.lambda;
    }
    out.value = std::clamp(onset, a.lambda, bins.back().lambda);
    return out;
}

std::string_view to_string(Regime regime) {
    return regime == Regime::perturbative ? "perturbative" : "nonperturbative";
}

Regime classify_regime(double epsilon, double delta_x_c, double crossover) {
    return std::abs(epsilon) < crossover * delta_x_c ? Regime::perturbative : Regime::nonperturbative;
}

DecayFit fit_gamma(std::span<const double> times, std::span<const double> p, double saturation_level) {
    if (times.size() != p.size()) throw std::invalid_argument("fit_gamma: times and values differ in length");
    const double floor = 3.0 * saturation_level;
    std::size_t lo = 0;
    while (lo < p.size() && !(p[lo] < 0.8)) ++lo;
    if (lo == p.size()) throw std::invalid_argument("fit_gamma: trace never decays below 0.8");
    std::size_t hi = lo;
    while (hi < p.size() && p[hi] > floor && p[hi] < 0.8) ++hi;
    const std::size_t n = hi - lo;
    if (n < 8) {
        throw NumericalError(fmt::format("fit_gamma: only {} samples between {:.3g} and 0.8; refine the time grid", n,
                                         floor));
    }
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double y = std::log(p[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
    }
    const double dn = static_cast<double>(n);
    const double slope = (dn * sty - st * sy) / (dn * stt - st * st);
    DecayFit fit;
    fit.intercept = (sy - slope * st) / dn;
    fit.gamma = std::max(0.0, -slope);
    fit.t_lo = times[lo];
    fit.t_hi = times[hi - 1];
    fit.points = n;
    double ss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) ss += std::pow(std::log(p[i]) - (fit.intercept + slope * times[i]), 2);
    fit.residual = std::sqrt(ss / dn);
    return fit;
}

EchoCondition echo_condition(const StateVector& psi, const EvolutionPair& pair, double period) {
    const double half = 0.5 * period;
    EchoCondition out;
    out.p_sr = return_probability(psi, pair, half, 0.0);
    out.p_le = return_probability(psi, pair, half, half);
    out.satisfied = out.p_sr < out.p_le;
    return out;
}

}  // namespace qrev
