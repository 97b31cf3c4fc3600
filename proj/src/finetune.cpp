#include "vpp/finetune.hpp"

#include <algorithm>
#include <cmath>

namespace vpp {

void FineTuneConfig::validate() const {
    if (eta_tau <= 0.0 || eta_coeff <= 0.0)
        throw InvalidParameterError("learning rates must be positive");
    if (max_iters < 1) throw InvalidParameterError("max_iters must be at least 1");
    if (tau_min <= 0.0 || tau_max <= tau_min)
        throw InvalidParameterError("time constant projection bounds must satisfy 0 < min < max");
}

NormalizedDataset normalize_dataset(const TimeSeries& ts, const Normalization& n) {
    ts.check_lengths();
    NormalizedDataset d;
    d.grid = ts.grid();
    const auto& wr = ts.at("omega_ref");
    const auto& br = ts.at("beta_ref");
    const auto& th = ts.at("thrust");
    d.omega_ref.resize(ts.size());
    d.beta_ref.resize(ts.size());
    d.thrust.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        d.omega_ref[i] = n.omega_to_n(wr[i]);
        d.beta_ref[i] = n.beta_to_n(br[i]);
        d.thrust[i] = n.thrust_to_n(th[i]);
    }
    return d;
}

namespace {

constexpr std::size_t kAug = 4 + 16;  // states + sensitivities to the four time constants

// Rate of the state plus its sensitivity columns with respect to the time
// constants (coefficient columns stay zero and are not carried).
void augmented_rate(std::span<const double> xs, std::span<const double> u,
                    const WienerParams& p, std::span<double> rate) {
    const double* x = xs.data();
    const double* s = xs.data() + 4;  // s[4*k + row], column k over the taus
    rate[0] = (x[2] - x[0]) / p.tau_omega_1;
    rate[1] = (x[3] - x[1]) / p.tau_beta_1;
    rate[2] = (u[0] - x[2]) / p.tau_omega_2;
    rate[3] = (u[1] - x[3]) / p.tau_beta_2;

    for (int k = 0; k < 4; ++k) {
        const double* sk = s + 4 * k;
        double* rk = rate.data() + 4 + 4 * k;
        rk[0] = (sk[2] - sk[0]) / p.tau_omega_1;
        rk[1] = (sk[3] - sk[1]) / p.tau_beta_1;
        rk[2] = -sk[2] / p.tau_omega_2;
        rk[3] = -sk[3] / p.tau_beta_2;
    }
    // d(1/tau)/dtau = -1/tau^2 terms, one row per time constant.
    rate[4 + 0] -= (x[2] - x[0]) / (p.tau_omega_1 * p.tau_omega_1);
    rate[4 + 4 + 2] -= (u[0] - x[2]) / (p.tau_omega_2 * p.tau_omega_2);
    rate[4 + 8 + 1] -= (x[3] - x[1]) / (p.tau_beta_1 * p.tau_beta_1);
    rate[4 + 12 + 3] -= (u[1] - x[3]) / (p.tau_beta_2 * p.tau_beta_2);
}

double forward_pass(const WienerParams& p, const NormalizedDataset& d,
                    std::array<double, WienerParams::kCount>* grad) {
    p.validate();
    d.grid.validate();
    const std::size_t n = d.grid.n_steps;
    if (d.omega_ref.size() != n || d.beta_ref.size() != n || d.thrust.size() != n)
        throw DataError("dataset channels do not match the grid");

    std::array<double, kAug> x{};
    // Steady start: all states at the initial references, sensitivities zero.
    x[0] = x[2] = d.omega_ref[0];
    x[1] = x[3] = d.beta_ref[0];

    RateFn f = [&p](double, std::span<const double> xs, std::span<const double> u,
                    std::span<double> rate) { augmented_rate(xs, u, p, rate); };

    const double dt = d.grid.dt;
    const double scale = dt / static_cast<double>(n);
    double j = 0.0;
    if (grad) grad->fill(0.0);

    std::array<double, kAug> x_next{};
    for (std::size_t i = 0; i < n; ++i) {
        const double that = thrust_output(x[0], x[1], p);
        const double r = that - d.thrust[i];
        j += 0.5 * r * r * scale;
        if (grad) {
            const OutputJacobians jac = output_jacobians(x[0], x[1], p);
            for (int k = 0; k < 4; ++k) {
                const double z = jac.dh_domega * x[4 + 4 * k + 0] + jac.dh_dbeta * x[4 + 4 * k + 1];
                (*grad)[static_cast<std::size_t>(k)] += r * z * scale;
            }
            for (int k = 0; k < 5; ++k)
                (*grad)[static_cast<std::size_t>(4 + k)] +=
                    r * jac.dh_dcoeff[static_cast<std::size_t>(k)] * scale;
        }
        if (i + 1 < n) {
            const std::array<double, 2> u = {d.omega_ref[i], d.beta_ref[i]};
            rk4_step(f, d.grid.time(i), x, u, dt, x_next);
            x = x_next;
        }
    }
    return j;
}

}  // namespace

double cost(const WienerParams& params, const NormalizedDataset& data) {
    return forward_pass(params, data, nullptr);
}

SensitivityState sensitivity_rhs(const WienerState& state, const SensitivityState& sens,
                                 const RefInput& input, const WienerParams& p) {
    p.validate();
    SensitivityState rate;
    for (int k = 0; k < WienerParams::kCount; ++k) {
        const auto col = [&](int row) { return sens.s[static_cast<std::size_t>(row)]
                                                 [static_cast<std::size_t>(k)]; };
        rate.s[0][static_cast<std::size_t>(k)] = (col(2) - col(0)) / p.tau_omega_1;
        rate.s[1][static_cast<std::size_t>(k)] = (col(3) - col(1)) / p.tau_beta_1;
        rate.s[2][static_cast<std::size_t>(k)] = -col(2) / p.tau_omega_2;
        rate.s[3][static_cast<std::size_t>(k)] = -col(3) / p.tau_beta_2;
    }
    rate.s[0][0] -= (state.x_omega - state.d_omega) / (p.tau_omega_1 * p.tau_omega_1);
    rate.s[2][1] -= (input.omega_ref - state.x_omega) / (p.tau_omega_2 * p.tau_omega_2);
    rate.s[1][2] -= (state.x_beta - state.d_beta) / (p.tau_beta_1 * p.tau_beta_1);
    rate.s[3][3] -= (input.beta_ref - state.x_beta) / (p.tau_beta_2 * p.tau_beta_2);

    const OutputJacobians jac = output_jacobians(state.d_omega, state.d_beta, p);
    for (int k = 0; k < WienerParams::kCount; ++k)
        rate.z[static_cast<std::size_t>(k)] =
            jac.dh_domega * sens.s[0][static_cast<std::size_t>(k)] +
            jac.dh_dbeta * sens.s[1][static_cast<std::size_t>(k)];
    for (int k = 0; k < 5; ++k)
        rate.z[static_cast<std::size_t>(4 + k)] += jac.dh_dcoeff[static_cast<std::size_t>(k)];
    return rate;
}

std::array<double, WienerParams::kCount> gradient(const WienerParams& params,
                                                  const NormalizedDataset& data) {
    std::array<double, WienerParams::kCount> g{};
    forward_pass(params, data, &g);
    return g;
}

std::array<double, WienerParams::kCount> finite_difference_gradient(
    const WienerParams& params, const NormalizedDataset& data, double rel_step) {
    std::array<double, WienerParams::kCount> g{};
    auto p = params.to_vector();
    for (std::size_t k = 0; k < WienerParams::kCount; ++k) {
        const double h = rel_step * std::max(std::abs(p[k]), 1e-3);
        auto hi = p, lo = p;
        hi[k] += h;
        lo[k] -= h;
        g[k] = (cost(WienerParams::from_vector(hi), data) -
                cost(WienerParams::from_vector(lo), data)) /
               (2.0 * h);
    }
    return g;
}

FineTuneResult gradient_descent(const WienerParams& p0, const NormalizedDataset& data,
                                const FineTuneConfig& cfg) {
    cfg.validate();
    p0.validate();

    FineTuneResult res;
    auto p = p0.to_vector();
    double j = cost(p0, data);
    res.curve.cost.push_back(j);
    const double j0 = j;

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const auto g = gradient(WienerParams::from_vector(p), data);
        for (double gk : g)
            if (!std::isfinite(gk)) throw NumericError("non-finite gradient during fine-tuning");

        double scale = 1.0;
        bool accepted = false;
        auto trial = p;
        double j_trial = j;
        for (std::size_t h = 0; h <= cfg.max_halvings; ++h) {
            for (std::size_t k = 0; k < WienerParams::kCount; ++k) {
                if (cfg.frozen[k]) {
                    trial[k] = p[k];
                    continue;
                }
                const double eta = k < 4 ? cfg.eta_tau : cfg.eta_coeff;
                trial[k] = p[k] - scale * eta * g[k];
                if (k < 4) trial[k] = std::clamp(trial[k], cfg.tau_min, cfg.tau_max);
            }
            // A too-aggressive step can push a time constant to the lower
            // bound, where the explicit integrator blows up; such trials are
            // rejected like any other non-descent step.
            try {
                j_trial = cost(WienerParams::from_vector(trial), data);
            } catch (const NumericError&) {
                j_trial = std::numeric_limits<double>::infinity();
            }
            if (j_trial <= j) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            // No descent even at the smallest step: treat as converged.
            res.converged = true;
            break;
        }
        if (j_trial > 10.0 * j0)
            throw NumericError("fine-tuning diverged; reduce the learning rates");

        const double dj = j - j_trial;
        p = trial;
        j = j_trial;
        res.curve.cost.push_back(j);
        ++res.iterations;
        if (dj < cfg.stop_threshold) {
            res.converged = true;
            break;
        }
    }

    res.params = WienerParams::from_vector(p);
    return res;
}

}  // namespace vpp
