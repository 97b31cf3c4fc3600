#include "vpp/ident.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "vpp/control.hpp"

namespace vpp {

void StaticGridSpec::validate() const {
    if (n_omega < 2 || n_beta < 2) throw InvalidParameterError("static grid must be at least 2x2");
    if (omega_min >= omega_max || beta_min >= beta_max)
        throw InvalidParameterError("static grid ranges must be ordered");
    if (fit_beta_min < beta_min - 1e-9 || fit_beta_max > beta_max + 1e-9)
        throw InvalidParameterError("fitting truncation must lie within the measured range");
    if (settle_time < 0.0 || sample_rate <= 0.0 || n_samples < 1)
        throw InvalidParameterError("invalid static acquisition settings");
}

double eval_static_map(const std::array<double, 5>& c, double w, double b) {
    return c[0] * w * w + c[1] * w * b + c[2] * w * w * b + c[3] * w * b * b + c[4] * w * w * w;
}

StaticMapFit fit_static_map(const std::vector<StaticSample>& samples, double fit_beta_min,
                            double fit_beta_max) {
    std::vector<StaticSample> kept;
    kept.reserve(samples.size());
    for (const auto& s : samples)
        if (s.beta >= fit_beta_min - 1e-12 && s.beta <= fit_beta_max + 1e-12) kept.push_back(s);
    constexpr int k = 5;
    if (kept.size() < k) throw DataError("static map fit needs at least 5 grid points");

    const auto n = static_cast<Eigen::Index>(kept.size());
    Eigen::MatrixXd design(n, k);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = kept[static_cast<std::size_t>(i)].omega;
        const double b = kept[static_cast<std::size_t>(i)].beta;
        design(i, 0) = w * w;
        design(i, 1) = w * b;
        design(i, 2) = w * w * b;
        design(i, 3) = w * b * b;
        design(i, 4) = w * w * w;
        rhs(i) = kept[static_cast<std::size_t>(i)].thrust;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < k) throw DataError("static map fit: degenerate grid (rank-deficient basis)");
    const Eigen::VectorXd c = qr.solve(rhs);

    StaticMapFit fit;
    for (int i = 0; i < k; ++i) fit.coeffs[static_cast<std::size_t>(i)] = c(i);
    const Eigen::VectorXd resid = rhs - design * c;
    fit.residuals.assign(resid.data(), resid.data() + resid.size());

    const double ss_res = resid.squaredNorm();
    const double mean = rhs.mean();
    const double ss_tot = (rhs.array() - mean).matrix().squaredNorm();
    const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    const double dn = static_cast<double>(n);
    fit.adjusted_r2 = kept.size() > k + 1 ? 1.0 - (1.0 - r2) * (dn - 1.0) / (dn - k - 1.0) : r2;
    return fit;
}

double thrust_coefficient(double thrust, double omega_rpm, double rho, double diameter) {
    if (omega_rpm == 0.0) throw NumericError("thrust coefficient undefined at zero speed");
    const double n_rev = omega_rpm / 60.0;
    return thrust / (rho * n_rev * n_rev * diameter * diameter * diameter * diameter);
}

std::array<double, 6> physical_to_normalized_extended(const std::array<double, 5>& c,
                                                      const Normalization& n) {
    n.validate();
    // omega = W*w, beta = S*b - O with normalized (w, b).
    const double W = n.omega_scale;
    const double S = n.beta_span;
    const double O = n.beta_offset;
    const double T = n.thrust_scale;
    std::array<double, 6> out{};  // [w, w^2, w^3, wb, w^2 b, w b^2]
    // c0 w^2 terms
    out[1] += c[0] * W * W;
    // c1 w b = c1 W w (S b - O)
    out[3] += c[1] * W * S;
    out[0] += -c[1] * W * O;
    // c2 w^2 b = c2 W^2 w^2 (S b - O)
    out[4] += c[2] * W * W * S;
    out[1] += -c[2] * W * W * O;
    // c3 w b^2 = c3 W w (S b - O)^2
    out[5] += c[3] * W * S * S;
    out[3] += -2.0 * c[3] * W * S * O;
    out[0] += c[3] * W * O * O;
    // c4 w^3
    out[2] += c[4] * W * W * W;
    for (double& v : out) v /= T;
    return out;
}

double eval_extended_map(const std::array<double, 6>& c, double w, double b) {
    return c[0] * w + c[1] * w * w + c[2] * w * w * w + c[3] * w * b + c[4] * w * w * b +
           c[5] * w * b * b;
}

NormalizedStepResponse normalize_step_response(const TimeSeries& raw, double step_time,
                                               double baseline_window) {
    const auto& thrust = raw.at("thrust");
    const TimeGrid& grid = raw.grid();
    const auto n = thrust.size();
    const auto step_idx = static_cast<std::size_t>(std::llround((step_time - grid.t0) / grid.dt));
    if (step_idx < 2 || step_idx + 2 > n)
        throw DataError("step time outside the record interior");
    const auto win = std::max<std::size_t>(2, static_cast<std::size_t>(baseline_window / grid.dt));
    if (win > step_idx || win > n - step_idx)
        throw DataError("baseline window longer than a record phase");

    auto window_stats = [&](std::size_t end) {
        double mean = 0.0;
        for (std::size_t i = end - win; i < end; ++i) mean += thrust[i];
        mean /= static_cast<double>(win);
        double var = 0.0;
        for (std::size_t i = end - win; i < end; ++i) {
            const double d = thrust[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(win - 1);
        return std::pair<double, double>{mean, std::sqrt(var)};
    };

    NormalizedStepResponse out;
    const auto [pre_mean, pre_sigma] = window_stats(step_idx);
    const auto [post_mean, post_sigma] = window_stats(n);
    out.pre_mean = pre_mean;
    out.post_mean = post_mean;
    out.noise_sigma = pre_sigma;

    const double amplitude = post_mean - pre_mean;
    if (std::abs(amplitude) <= 3.0 * pre_sigma || amplitude == 0.0)
        throw DataError("step amplitude below the noise floor");

    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.y[i] = (thrust[i] - pre_mean) / amplitude;
    return out;
}

double second_order_step_response(double t, double tau_1, double tau_2) {
    if (tau_1 <= 0.0 || tau_2 <= 0.0)
        throw InvalidParameterError("step response time constants must be positive");
    if (t <= 0.0) return 0.0;
    const double rel = std::abs(tau_1 - tau_2) / std::max(tau_1, tau_2);
    if (rel < 1e-9) {
        const double tau = 0.5 * (tau_1 + tau_2);
        return 1.0 - (1.0 + t / tau) * std::exp(-t / tau);
    }
    return 1.0 -
           (tau_1 * std::exp(-t / tau_1) - tau_2 * std::exp(-t / tau_2)) / (tau_1 - tau_2);
}

TimeConstantFit fit_time_constants(std::span<const double> y, double dt) {
    if (y.size() < 5) throw DataError("time constant fit needs at least 5 samples");
    if (dt <= 0.0) throw InvalidParameterError("dt must be positive");

    auto sse = [&](double tau_1, double tau_2) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = y[i] - second_order_step_response(dt * static_cast<double>(i),
                                                               tau_1, tau_2);
            s += d * d;
        }
        return s;
    };

    // Coarse log grid seed over [1 ms, 2 s]^2.
    constexpr int kGrid = 20;
    const double lo = std::log(1e-3), hi = std::log(2.0);
    double best = std::numeric_limits<double>::infinity();
    double seed1 = 0.1, seed2 = 0.1;
    for (int i = 0; i < kGrid; ++i) {
        const double t1 = std::exp(lo + (hi - lo) * i / (kGrid - 1.0));
        for (int j = 0; j <= i; ++j) {  // symmetric under exchange
            const double t2 = std::exp(lo + (hi - lo) * j / (kGrid - 1.0));
            const double s = sse(t1, t2);
            if (s < best) {
                best = s;
                seed1 = t1;
                seed2 = t2;
            }
        }
    }

    // Refinement in log space keeps the constants positive.
    auto objective = [&](std::span<const double> x) {
        const double t1 = std::exp(x[0]);
        const double t2 = std::exp(x[1]);
        if (t1 < 1e-4 || t1 > 10.0 || t2 < 1e-4 || t2 > 10.0)
            return std::numeric_limits<double>::infinity();
        return sse(t1, t2);
    };
    const std::array<double, 2> x0 = {std::log(seed1), std::log(seed2)};
    NelderMeadOptions opt;
    opt.simplex_tol = 1e-10;
    opt.f_tol = 1e-14;
    const auto res = nelder_mead(objective, x0, opt);

    TimeConstantFit fit;
    fit.tau_1 = std::exp(res.x[0]);
    fit.tau_2 = std::exp(res.x[1]);
    if (fit.tau_1 < fit.tau_2) std::swap(fit.tau_1, fit.tau_2);
    fit.rms_residual = std::sqrt(res.f / static_cast<double>(y.size()));
    fit.poor_fit = fit.rms_residual > 0.2;
    return fit;
}

StepExperiment analyze_step_record(const TimeSeries& raw, double step_time) {
    StepExperiment exp;
    exp.raw = raw;
    try {
        exp.normalized = normalize_step_response(raw, step_time);
    } catch (const DataError& e) {
        exp.exclusion_reason = e.what();
        return exp;
    }
    const TimeGrid& grid = raw.grid();
    const auto step_idx = static_cast<std::size_t>(std::llround((step_time - grid.t0) / grid.dt));
    const std::span<const double> post(exp.normalized.y.data() + step_idx,
                                       exp.normalized.y.size() - step_idx);
    exp.fitted = fit_time_constants(post, grid.dt);
    if (exp.fitted.poor_fit) {
        exp.exclusion_reason = "post-step fit residual above 0.2";
        return exp;
    }
    // Coverage check: the record must span several loop time constants.
    if (grid.dt * static_cast<double>(post.size()) < 5.0 * (exp.fitted.tau_1 + exp.fitted.tau_2)) {
        exp.exclusion_reason = "post-step window shorter than 5 (tau_1 + tau_2)";
        return exp;
    }
    exp.valid = true;
    return exp;
}

std::pair<double, double> average_time_constants(const std::vector<StepExperiment>& experiments) {
    double t1 = 0.0, t2 = 0.0;
    std::size_t n = 0;
    for (const auto& e : experiments) {
        if (!e.valid) continue;
        t1 += e.fitted.tau_1;
        t2 += e.fitted.tau_2;
        ++n;
    }
    if (n == 0) throw DataError("no valid step experiments to average");
    return {t1 / static_cast<double>(n), t2 / static_cast<double>(n)};
}

}  // namespace vpp
