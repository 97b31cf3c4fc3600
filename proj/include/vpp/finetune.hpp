#pragma once

#include <array>
#include <vector>

#include "vpp/core_model.hpp"
#include "vpp/ode.hpp"

namespace vpp {

/// Settings for the sensitivity-based parameter refinement.
struct FineTuneConfig {
    // Learning rates per parameter group (dry-run calibrated; the dt factor
    // in the cost makes the natural gradient scale small).
    double eta_tau = 250.0;
    double eta_coeff = 2500.0;
    double stop_threshold = 1e-8;
    std::size_t max_iters = 350;
    double tau_min = 1e-3;  // projection bounds for the time constants
    double tau_max = 2.0;
    std::array<bool, WienerParams::kCount> frozen{};  // per-parameter freeze mask
    std::size_t max_halvings = 10;

    void validate() const;
};

/// State sensitivities (4 states x 9 parameters) and the output sensitivity
/// vector. Columns for the polynomial coefficients are identically zero.
struct SensitivityState {
    std::array<std::array<double, WienerParams::kCount>, 4> s{};
    std::array<double, WienerParams::kCount> z{};
};

struct LearningCurve {
    std::vector<double> cost;  // includes the initial point
};

/// Open-loop dataset view in normalized units on a uniform grid.
struct NormalizedDataset {
    TimeGrid grid;
    std::vector<double> omega_ref;
    std::vector<double> beta_ref;
    std::vector<double> thrust;
};

/// Converts a record with omega_ref/beta_ref (RPM/deg) and thrust (N)
/// channels into normalized units.
NormalizedDataset normalize_dataset(const TimeSeries& ts, const Normalization& n);

/// Mean squared thrust mismatch along the simulated trajectory:
/// (1/N) sum_i (1/2)(That_i - T_i)^2 dt, starting from the steady state of
/// the first reference sample.
double cost(const WienerParams& params, const NormalizedDataset& data);

/// Time derivative of the sensitivity columns at the given state; also fills
/// the output sensitivity z at the state.
SensitivityState sensitivity_rhs(const WienerState& state, const SensitivityState& sens,
                                 const RefInput& input, const WienerParams& params);

/// Gradient of cost() via one combined forward pass of states and
/// sensitivities on the same integration grid.
std::array<double, WienerParams::kCount> gradient(const WienerParams& params,
                                                  const NormalizedDataset& data);

/// Central-difference gradient of cost(), used as a verification oracle.
std::array<double, WienerParams::kCount> finite_difference_gradient(
    const WienerParams& params, const NormalizedDataset& data, double rel_step = 1e-6);

struct FineTuneResult {
    WienerParams params;
    LearningCurve curve;
    std::size_t iterations = 0;
    bool converged = false;  // stopped on the cost-difference threshold
};

/// Fixed-step descent with per-group learning rates, positivity projection of
/// the time constants, and step halving when an update increases the cost.
FineTuneResult gradient_descent(const WienerParams& p0, const NormalizedDataset& data,
                                const FineTuneConfig& config);

}  // namespace vpp
