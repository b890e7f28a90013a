#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "qrev/common.hpp"
#include "qrev/preparation.hpp"
#include "qrev/propagation.hpp"

namespace qrev {

struct CompensationResult {
    double t_r = 0.0;
    double t_r_over_T = 0.0;
    double p_max = 0.0;
    std::size_t n_realizations = 1;
    double spread = 0.0;  // std of t_r/T across realizations
};

/// Maximum of P(t) over [T/2, T]; earliest maximiser on ties, optional
/// parabolic refinement. A trace that returns to 1 at T (to 1e-12) reports
/// t_r = T.
CompensationResult find_tr(const EchoTrace& trace, bool refine = true);

/// Mean of per-realization results; spread is the sample standard deviation
/// of t_r/T.
CompensationResult average_results(std::span<const CompensationResult> results);

enum class LambdaFlag {
    numeric,
    small,     // coherent / random superposition: reported as 0
    infinite,  // eigenstate preparation
};

struct Lambda {
    double value = 0.0;
    LambdaFlag flag = LambdaFlag::numeric;
};

Lambda lambda_for(PreparationKind kind, double epsilon_prep, double epsilon_evol);
std::string_view lambda_label(const Lambda& lambda);

struct ScalingPoint {
    Lambda lambda;
    double t_r_over_T = 0.0;
    double spread = 0.0;
    double epsilon_prep = 0.0;
    double epsilon_evol = 0.0;
    double period = 0.0;
    ModelKind kind = ModelKind::physical_2dw;
    std::size_t n = 1;
};

struct ScalingBin {
    double lambda = 0.0;  // +inf for the eigenstate bin
    double f_mean = 0.0;
    double f_std = 0.0;   // across the points of the bin
    std::size_t n = 0;
};

struct ScalingCurve {
    std::vector<ScalingBin> bins;  // ascending lambda
    bool monotone = true;          // nonincreasing within the bin spreads
};

/// Groups points whose lambda agrees to `relative_tolerance`; flagged points go
/// to lambda = 0 (small) or lambda = +inf (infinite).
ScalingCurve scaling_curve(std::span<const ScalingPoint> points, double relative_tolerance = 1e-6);

struct LambdaStar {
    double value = 0.0;
    double uncertainty = 0.0;
    std::size_t plateau_first_bin = 0;
};

/// Onset of the f = 0.5 plateau. The plateau is the tail run of finite bins
/// within `plateau_tolerance` of 0.5; the onset is where the line through the
/// last two bins before it reaches 0.5, kept between the last pre-plateau bin
/// and the largest sampled lambda.
LambdaStar estimate_lambda_star(const ScalingCurve& curve, double plateau_tolerance = 0.03);

enum class Regime { perturbative, nonperturbative };
std::string_view to_string(Regime regime);
Regime classify_regime(double epsilon, double delta_x_c, double crossover = 5.0);

struct DecayFit {
    double gamma = 0.0;
    double intercept = 0.0;  // of log P
    double t_lo = 0.0;
    double t_hi = 0.0;
    double residual = 0.0;   // RMS of log residuals
    std::size_t points = 0;
};

/// Straight line through log P over the first contiguous stretch where
/// 3 * saturation_level < P < 0.8.
DecayFit fit_gamma(std::span<const double> times, std::span<const double> p, double saturation_level);

struct EchoCondition {
    double p_sr = 0.0;
    double p_le = 0.0;
    bool satisfied = false;
};

/// P_SR(T/2) under H1 against P_LE(T/2).
EchoCondition echo_condition(const StateVector& psi, const EvolutionPair& pair, double period);

}  // namespace qrev
