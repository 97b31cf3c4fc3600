#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "vpp/ode.hpp"

namespace vpp {

/// Physical parameters of the electromechanical powertrain, SI units.
struct PlantParams {
    double rho = 1.225;        // kg/m^3
    double R = 0.127;          // m, disk radius
    double tau_lambda = 0.03;  // s, inflow lag
    double J = 2.97e-4;        // kg m^2, rotor + prop inertia
    double k_Q = 0.025;        // N m / A, motor torque constant
    double k_omega = 1.2e-3;   // N m s / rad, viscous losses
    double L_m = 2e-6;         // H
    double R_m = 0.08;         // ohm
    double V_in = 24.0;        // V, motor supply
    double k_i = 0.025;        // V s / rad, motor back-EMF
    double J_a = 2e-4;         // kg m^2, pitch mechanism inertia
    double D_a = 1.083e-3;     // N m s / rad, pitch damping
    double k_a = 3.02e-4;      // N m / A, actuator torque constant
    double L_a = 4e-5;         // H
    double R_a = 2.0;          // ohm
    double k_ia = 1.0;         // V s / rad, actuator back-EMF
    double V_in_actuator = 15.0;  // V

    double disk_area() const;
    void validate() const;
};

/// Quasi-steady aerodynamic maps as low-order polynomials in pitch (rad) and
/// inflow ratio. Coefficients are configuration data, not physics.
struct AeroMaps {
    // C_T(lambda, beta) = ct0 + ct_beta*b + ct_beta2*b^2 + ct_lambda*l
    double ct0 = 0.031;
    double ct_beta = 0.20;
    double ct_beta2 = 0.25;
    double ct_lambda = -0.02;
    // C_Q(lambda, beta) = cq0 + cq_beta*b + cq_lambda*l
    double cq0 = 0.0075;
    double cq_beta = 0.012;
    double cq_lambda = 0.01;
    // lambda_qs(beta) = lqs0 + lqs_beta*b
    double lqs0 = 0.05;
    double lqs_beta = 0.12;

    double c_thrust(double lambda, double beta_rad) const;
    double c_torque(double lambda, double beta_rad) const;
    double lambda_qs(double beta_rad) const;
};

/// Full plant state. z_omega is the RPM PI integrator (RPM*s), carried along
/// so the closed-loop plant is a plain autonomous ODE in the references.
struct PlantState {
    double omega = 0.0;     // rad/s
    double I_m = 0.0;       // A
    double lambda = 0.0;    // inflow ratio
    double beta = 0.0;      // rad
    double beta_dot = 0.0;  // rad/s
    double I_a = 0.0;       // A
    double z_omega = 0.0;   // RPM*s

    static constexpr std::size_t kDim = 7;
    std::array<double, kDim> to_vector() const {
        return {omega, I_m, lambda, beta, beta_dot, I_a, z_omega};
    }
    static PlantState from_vector(std::span<const double> v);
};

/// Low-level loop gains. The RPM PI acts on the error in RPM and outputs a
/// duty cycle; the pitch PD acts on the error in degrees.
struct LowLevelGains {
    double pi_kp = 1e-4;
    double pi_ki = 2e-3;
    double pd_kp = 10.0;
    double pd_kd = 10.0;

    void validate() const;
};

/// Output of linearize(): torque Jacobians, closed-loop gain/time-constant
/// aggregates, and the reduced two-lag pairs per loop (tau_1 >= tau_2).
struct LinearizationPoint {
    double omega0 = 0.0;  // rad/s
    double beta0 = 0.0;   // rad
    double c_q_omega = 0.0;
    double c_q_beta = 0.0;
    double tau_omega = 0.0;
    double K_P = 0.0;
    double K_I = 0.0;
    double K_beta = 0.0;
    double a_beta = 0.0;
    double b_beta = 0.0;
    double tau_omega_1 = 0.0;
    double tau_omega_2 = 0.0;
    double tau_beta_1 = 0.0;
    double tau_beta_2 = 0.0;
};

/// Aerodynamic torque Q_a at quasi-steady inflow for the given pitch.
double aero_torque(double omega, double beta_rad, const PlantParams& p, const AeroMaps& m);

/// Open-plant state rate for given duty cycles. The motor duty is clipped to
/// [0, 1]; the pitch actuator is driven through an H-bridge and its duty is
/// clipped to [-1, 1].
PlantState plant_derivative(const PlantState& state, double u_omega, double u_beta,
                            const PlantParams& p, const AeroMaps& m);

double thrust_from_state(const PlantState& state, const PlantParams& p, const AeroMaps& m);

/// Closed-loop rate: RPM PI and pitch PD compute the duty cycles from the
/// references (rad/s, rad), then delegate to plant_derivative. Also returns
/// the duty cycles actually applied.
PlantState closed_loop_plant_derivative(const PlantState& state, double omega_ref,
                                        double beta_ref, const PlantParams& p,
                                        const AeroMaps& m, const LowLevelGains& g,
                                        double* u_omega_out = nullptr,
                                        double* u_beta_out = nullptr);

/// Exact steady state for constant references; throws NumericError if the
/// required motor duty leaves [0, 1].
PlantState steady_state(double omega_ref, double beta_ref, const PlantParams& p,
                        const AeroMaps& m, const LowLevelGains& g);

LinearizationPoint linearize(const PlantParams& p, const AeroMaps& m, const LowLevelGains& g,
                             double omega0, double beta0);

/// Reference schedule in display units (RPM, deg), piecewise constant.
struct RefSchedule {
    std::vector<double> omega_ref_rpm;
    std::vector<double> beta_ref_deg;
};

struct SimOptions {
    double sigma_thrust = 0.0;  // N, Gaussian noise on the thrust channel only
    std::uint64_t seed = 0;
    double dead_band_deg = 0.0;  // optional pitch-reference dead band
};

/// Operating box for generated data.
struct OperatingBox {
    double omega_min_rpm = 2000.0;
    double omega_max_rpm = 6000.0;
    double beta_min_deg = -10.0;
    double beta_max_deg = 10.0;
};

/// Simulates the closed-loop plant through a reference schedule sampled on
/// `grid`, starting from the steady state of the first reference pair.
/// Channels: omega_ref, beta_ref, omega, beta (RPM/deg) and thrust (N).
TimeSeries simulate_closed_loop_plant(const RefSchedule& refs, const TimeGrid& grid,
                                      const PlantParams& p, const AeroMaps& m,
                                      const LowLevelGains& g, const SimOptions& opt,
                                      const OperatingBox& box = {});

/// Same trajectory with the electrical states removed by algebraic
/// substitution (currents at their quasi-steady values).
TimeSeries simulate_closed_loop_plant_reduced(const RefSchedule& refs, const TimeGrid& grid,
                                              const PlantParams& p, const AeroMaps& m,
                                              const LowLevelGains& g, const SimOptions& opt,
                                              const OperatingBox& box = {});

/// One step-response record: pre-step hold, then a reference step on one
/// channel while the other is held.
struct StepRecordSpec {
    bool omega_channel = true;  // false: pitch channel
    double start_level = 0.0;   // RPM or deg
    double end_level = 0.0;
    double hold_other = 0.0;    // deg or RPM, held channel value
    double pre_step = 5.0;      // s
    double post_step = 5.0;     // s
};

TimeSeries generate_step_record(const StepRecordSpec& spec, double dt, const PlantParams& p,
                                const AeroMaps& m, const LowLevelGains& g,
                                const SimOptions& opt, const OperatingBox& box = {});

/// Number of internal RK4 substeps per sample needed to keep the electrical
/// states stable at the given sampling interval.
std::size_t plant_substeps(double dt, const PlantParams& p);

}  // namespace vpp
