#pragma once

#include <array>
#include <optional>
#include <vector>

#include "vpp/core_model.hpp"
#include "vpp/ode.hpp"

namespace vpp {

/// Static characterization grid and fitting window.
struct StaticGridSpec {
    double omega_min = 2000.0;  // RPM
    double omega_max = 6000.0;
    double beta_min = -10.0;  // deg
    double beta_max = 10.0;
    std::size_t n_omega = 10;
    std::size_t n_beta = 10;
    double settle_time = 3.0;    // s
    double sample_rate = 250.0;  // Hz
    std::size_t n_samples = 5000;
    double fit_beta_min = -5.0;  // fitting truncation window, deg
    double fit_beta_max = 10.0;

    void validate() const;
};

struct StaticSample {
    double omega;  // RPM (or normalized, the fit is unit-agnostic)
    double beta;   // deg (or normalized)
    double thrust; // N (or normalized)
};

struct StaticMapFit {
    std::array<double, 5> coeffs{};  // basis [w^2, wb, w^2 b, w b^2, w^3]
    double adjusted_r2 = 0.0;
    std::vector<double> residuals;
};

/// Ordinary least squares of thrust on the five-monomial basis. Samples with
/// beta outside [fit_beta_min, fit_beta_max] are dropped first; pass
/// -inf/+inf bounds to keep everything.
StaticMapFit fit_static_map(const std::vector<StaticSample>& samples,
                            double fit_beta_min = -std::numeric_limits<double>::infinity(),
                            double fit_beta_max = std::numeric_limits<double>::infinity());

double eval_static_map(const std::array<double, 5>& coeffs, double omega, double beta);

/// Propeller-convention thrust coefficient T / (rho n^2 D^4), n in rev/s
/// converted from RPM as n = RPM / 60.
double thrust_coefficient(double thrust, double omega_rpm, double rho, double diameter);

/// Rewrites the five physical-unit coefficients (RPM/deg basis) on the
/// normalized monomials. The pitch offset makes a linear omega term appear,
/// so the target basis is extended: [w, w^2, w^3, w b, w^2 b, w b^2] with
/// w, b normalized. The rewrite is exact.
std::array<double, 6> physical_to_normalized_extended(const std::array<double, 5>& coeffs,
                                                      const Normalization& n);

double eval_extended_map(const std::array<double, 6>& coeffs, double omega_n, double beta_n);

struct NormalizedStepResponse {
    std::vector<double> y;      // unit-step-scaled thrust, full record length
    double pre_mean = 0.0;
    double post_mean = 0.0;
    double noise_sigma = 0.0;   // estimated from the pre-step baseline window
};

/// Scales a thrust record to a unit step: y = (T - T_pre) / (T_post - T_pre)
/// with baselines averaged over the final `baseline_window` seconds of each
/// phase. Throws DataError when the step amplitude is below 3 sigma of the
/// baseline noise.
NormalizedStepResponse normalize_step_response(const TimeSeries& raw, double step_time,
                                               double baseline_window = 1.0);

/// Unit step response of 1 / ((tau1 s + 1)(tau2 s + 1)).
double second_order_step_response(double t, double tau_1, double tau_2);

struct TimeConstantFit {
    double tau_1 = 0.0;  // >= tau_2 by convention
    double tau_2 = 0.0;
    double rms_residual = 0.0;
    bool poor_fit = false;  // RMS above 0.2
};

/// Least-squares fit of the post-step part of a normalized response against
/// the two-lag step shape: a 20x20 log-spaced grid over [1 ms, 2 s]^2 seeds a
/// Nelder-Mead refinement in log space.
TimeConstantFit fit_time_constants(std::span<const double> y, double dt);

struct StepExperiment {
    TimeSeries raw;
    NormalizedStepResponse normalized;
    TimeConstantFit fitted;
    bool valid = false;  // false: excluded (step too small or poor fit)
    std::string exclusion_reason;
};

/// Normalizes and fits one record; exclusions are recorded, not thrown.
StepExperiment analyze_step_record(const TimeSeries& raw, double step_time);

/// Arithmetic mean of the fitted pairs over the valid experiments.
std::pair<double, double> average_time_constants(const std::vector<StepExperiment>& experiments);

}  // namespace vpp
