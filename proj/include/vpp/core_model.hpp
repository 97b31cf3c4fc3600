#pragma once

#include <array>
#include <cmath>

#include "vpp/errors.hpp"

namespace vpp {

/// Identifiable parameters of the reduced powertrain model: four loop time
/// constants followed by the five coefficients of the static thrust polynomial.
/// The flat ordering [tau_omega_1, tau_omega_2, tau_beta_1, tau_beta_2,
/// c20, c11, c21, c12, c30] is fixed; gradients, sensitivities and
/// serialization all rely on it.
struct WienerParams {
    double tau_omega_1 = 0.15;
    double tau_omega_2 = 0.04;
    double tau_beta_1 = 0.11;
    double tau_beta_2 = 0.28;
    double c20 = 0.355;
    double c11 = 0.064;
    double c21 = 0.8;
    double c12 = -0.16;
    double c30 = -0.081;

    static constexpr int kCount = 9;

    std::array<double, kCount> to_vector() const {
        return {tau_omega_1, tau_omega_2, tau_beta_1, tau_beta_2,
                c20,         c11,         c21,        c12,        c30};
    }

    static WienerParams from_vector(const std::array<double, kCount>& v) {
        WienerParams p;
        p.tau_omega_1 = v[0];
        p.tau_omega_2 = v[1];
        p.tau_beta_1 = v[2];
        p.tau_beta_2 = v[3];
        p.c20 = v[4];
        p.c11 = v[5];
        p.c21 = v[6];
        p.c12 = v[7];
        p.c30 = v[8];
        return p;
    }

    bool time_constants_valid() const {
        return tau_omega_1 > 0.0 && tau_omega_2 > 0.0 && tau_beta_1 > 0.0 &&
               tau_beta_2 > 0.0;
    }

    void validate() const {
        if (!time_constants_valid())
            throw InvalidParameterError("model time constants must be strictly positive");
    }
};

/// Normalized model state: rotational speed, pitch, and the two auxiliary lag
/// states. For constant references (r_w, r_b) the equilibrium is
/// (r_w, r_b, r_w, r_b) since each chain has unity DC gain.
struct WienerState {
    double d_omega = 0.0;
    double d_beta = 0.0;
    double x_omega = 0.0;
    double x_beta = 0.0;

    std::array<double, 4> to_vector() const { return {d_omega, d_beta, x_omega, x_beta}; }

    static WienerState from_vector(const std::array<double, 4>& v) {
        return {v[0], v[1], v[2], v[3]};
    }
};

struct RefInput {
    double omega_ref = 0.0;
    double beta_ref = 0.0;
};

/// Scaling between physical units (RPM, degrees, newtons) and the normalized
/// quantities used by the model: w_n = w/omega_scale,
/// b_n = (b + beta_offset)/beta_span, T_n = T/thrust_scale.
struct Normalization {
    double omega_scale = 6000.0;  // RPM
    double beta_offset = 5.0;     // deg
    double beta_span = 15.0;      // deg
    double thrust_scale = 15.0;   // N

    void validate() const {
        if (omega_scale <= 0.0 || beta_span <= 0.0 || thrust_scale <= 0.0)
            throw InvalidParameterError("normalization scales must be strictly positive");
    }

    double omega_to_n(double omega_rpm) const { return omega_rpm / omega_scale; }
    double beta_to_n(double beta_deg) const { return (beta_deg + beta_offset) / beta_span; }
    double thrust_to_n(double thrust_newton) const { return thrust_newton / thrust_scale; }
    double omega_from_n(double omega_n) const { return omega_n * omega_scale; }
    double beta_from_n(double beta_n) const { return beta_n * beta_span - beta_offset; }
    double thrust_from_n(double thrust_n) const { return thrust_n * thrust_scale; }
};

struct NormalizedTriple {
    double omega_n;
    double beta_n;
    double thrust_n;
};

NormalizedTriple normalize(double omega_rpm, double beta_deg, double thrust_newton,
                           const Normalization& n);

void denormalize(const NormalizedTriple& t, const Normalization& n, double& omega_rpm,
                 double& beta_deg, double& thrust_newton);

/// State rate of the fourth-order two-lag dynamics for a held reference input.
WienerState wiener_derivative(const WienerState& state, const RefInput& input,
                              const WienerParams& params);

/// Static thrust map: c20 w^2 + c11 w b + c21 w^2 b + c12 w b^2 + c30 w^3,
/// all quantities normalized.
double thrust_output(double omega_n, double beta_n, const WienerParams& params);

struct OutputJacobians {
    double dh_domega;                  // dh/dw at the point
    double dh_dbeta;                   // dh/db at the point
    std::array<double, 5> dh_dcoeff;   // monomials [w^2, wb, w^2 b, w b^2, w^3]
};

OutputJacobians output_jacobians(double omega_n, double beta_n, const WienerParams& params);

}  // namespace vpp
