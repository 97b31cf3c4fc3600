#include "vpp/core_model.hpp"

namespace vpp {

NormalizedTriple normalize(double omega_rpm, double beta_deg, double thrust_newton,
                           const Normalization& n) {
    n.validate();
    return {n.omega_to_n(omega_rpm), n.beta_to_n(beta_deg), n.thrust_to_n(thrust_newton)};
}

void denormalize(const NormalizedTriple& t, const Normalization& n, double& omega_rpm,
                 double& beta_deg, double& thrust_newton) {
    n.validate();
    omega_rpm = n.omega_from_n(t.omega_n);
    beta_deg = n.beta_from_n(t.beta_n);
    thrust_newton = n.thrust_from_n(t.thrust_n);
}

WienerState wiener_derivative(const WienerState& state, const RefInput& input,
                              const WienerParams& params) {
    params.validate();
    WienerState rate;
    rate.d_omega = (state.x_omega - state.d_omega) / params.tau_omega_1;
    rate.d_beta = (state.x_beta - state.d_beta) / params.tau_beta_1;
    rate.x_omega = (input.omega_ref - state.x_omega) / params.tau_omega_2;
    rate.x_beta = (input.beta_ref - state.x_beta) / params.tau_beta_2;
    return rate;
}

double thrust_output(double omega_n, double beta_n, const WienerParams& p) {
    const double w = omega_n;
    const double b = beta_n;
    return p.c20 * w * w + p.c11 * w * b + p.c21 * w * w * b + p.c12 * w * b * b +
           p.c30 * w * w * w;
}

OutputJacobians output_jacobians(double omega_n, double beta_n, const WienerParams& p) {
    const double w = omega_n;
    const double b = beta_n;
    OutputJacobians j;
    j.dh_domega = 2.0 * p.c20 * w + p.c11 * b + 2.0 * p.c21 * w * b + p.c12 * b * b +
                  3.0 * p.c30 * w * w;
    j.dh_dbeta = p.c11 * w + p.c21 * w * w + 2.0 * p.c12 * w * b;
    j.dh_dcoeff = {w * w, w * b, w * w * b, w * b * b, w * w * w};
    return j;
}

}  // namespace vpp
