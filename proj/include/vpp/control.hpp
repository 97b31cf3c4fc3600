#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vpp/core_model.hpp"
#include "vpp/ode.hpp"

namespace vpp {

/// Thrust-controller gains, flat ordering [Kp_w, Ki_w, Kd_w, Kp_b, Ki_b, Kd_b].
struct PidGains {
    double kp_omega = 0.0;
    double ki_omega = 0.0;
    double kd_omega = 0.0;
    double kp_beta = 0.0;
    double ki_beta = 0.0;
    double kd_beta = 0.0;

    static constexpr int kCount = 6;
    std::array<double, kCount> to_vector() const {
        return {kp_omega, ki_omega, kd_omega, kp_beta, ki_beta, kd_beta};
    }
    static PidGains from_vector(std::span<const double> v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
};

/// Both PIDs share one error signal and one filtered derivative but keep
/// separate integrators and anti-windup clamp flags.
struct ControllerState {
    double e_int_omega = 0.0;
    double e_int_beta = 0.0;
    double e_prev = 0.0;
    double d_filt = 0.0;
    bool clamp_omega = false;
    bool clamp_beta = false;
};

/// Piecewise-constant setpoint: value of step k holds from time[k] on.
struct SetpointProfile {
    std::vector<double> times;
    std::vector<double> values;

    double at(double t) const;
};

enum class ActuationMode { combined, rpm_only };

struct ControlRunConfig {
    SetpointProfile setpoint;   // normalized thrust
    double t_opt = 10.0;        // s
    double alpha = 1e-4;        // gain norm weight
    double dt = 0.004;          // s
    double t_filter = 0.02;     // s, derivative filter time constant
    double omega_ref_min = 1.0 / 3.0;  // normalized actuator range
    double omega_ref_max = 1.0;
    double beta_ref_min = 0.0;
    double beta_ref_max = 1.0;
    // Feedforward operating point: the controller output is added to these
    // references so zero error holds the pre-step steady state.
    double bias_omega = 0.5;
    double bias_beta = 0.5;

    void validate() const;

    /// Default two-sided step test: low level, step up at t_opt/3, step down
    /// at 2 t_opt/3.
    static SetpointProfile default_profile(double t_opt, double low = 0.1, double high = 0.8,
                                           double mid = 0.3);
};

struct PidOutput {
    double omega_ref = 0.0;
    double beta_ref = 0.0;
};

/// One controller update: shared filtered derivative, trapezoidal integrators
/// with clamping, output clipping to the actuator ranges.
PidOutput pid_step(double e_thrust, ControllerState& state, const PidGains& gains,
                   const ControlRunConfig& config, double dt,
                   ActuationMode mode = ActuationMode::combined);

/// Closed-loop simulation of the reduced model under the thrust controller.
/// Channels (normalized units): thrust_set, thrust, omega_ref, beta_ref,
/// omega, beta.
TimeSeries closed_loop_simulate(const WienerParams& model, const PidGains& gains,
                                const ControlRunConfig& config,
                                ActuationMode mode = ActuationMode::combined);

/// Tracking cost over [0, t_opt] (rectangle rule) plus alpha * ||gains||^2.
/// In rpm_only mode the gain norm covers the three active gains.
double control_cost(const PidGains& gains, const WienerParams& model,
                    const ControlRunConfig& config, ActuationMode mode = ActuationMode::combined);

struct NelderMeadOptions {
    double initial_scale = 0.05;     // relative vertex perturbation
    double zero_step = 0.00025;      // absolute perturbation for zero coordinates
    double simplex_tol = 1e-6;
    double f_tol = 1e-10;
    std::size_t max_evals = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t n_evals = 0;
    std::vector<double> best_trace;  // best f after each accepted iteration
};

/// Standard simplex search (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> x0, const NelderMeadOptions& options = {});

struct TuneReport {
    PidGains gains;
    double cost = 0.0;
    double stage1_cost = 0.0;
    std::size_t n_evals = 0;
};

/// Two-stage gain optimization: P/I first with derivative gains frozen at
/// zero, then the derivative gains with P/I frozen.
TuneReport tune_gains(const WienerParams& model, const ControlRunConfig& config,
                      ActuationMode mode, const PidGains& initial_guess = {5.0, 50.0, 0.0, 5.0,
                                                                           50.0, 0.0});

}  // namespace vpp
