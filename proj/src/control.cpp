#include "vpp/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vpp {

namespace {

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double SetpointProfile::at(double t) const {
    if (times.empty()) throw InvalidParameterError("empty setpoint profile");
    double v = values.front();
    for (std::size_t i = 0; i < times.size(); ++i)
        if (t >= times[i] - 1e-12) v = values[i];
    return v;
}

void ControlRunConfig::validate() const {
    if (t_opt <= 0.0 || dt <= 0.0) throw InvalidParameterError("t_opt and dt must be positive");
    if (alpha < 0.0) throw InvalidParameterError("alpha must be non-negative");
    if (t_filter < dt) throw InvalidParameterError("derivative filter must be at least dt");
    if (setpoint.times.size() != setpoint.values.size())
        throw InvalidParameterError("setpoint profile times/values mismatch");
}

SetpointProfile ControlRunConfig::default_profile(double t_opt, double low, double high,
                                                  double mid) {
    return {{0.0, t_opt / 3.0, 2.0 * t_opt / 3.0}, {low, high, mid}};
}

PidOutput pid_step(double e, ControllerState& st, const PidGains& g,
                   const ControlRunConfig& cfg, double dt, ActuationMode mode) {
    const double delta = std::min(dt / cfg.t_filter, 1.0);
    st.d_filt = (1.0 - delta) * st.d_filt + delta * (e - st.e_prev) / dt;

    if (!st.clamp_omega) st.e_int_omega += 0.5 * (st.e_prev + e) * dt;
    if (!st.clamp_beta) st.e_int_beta += 0.5 * (st.e_prev + e) * dt;
    st.e_prev = e;

    const double raw_omega =
        cfg.bias_omega + g.kp_omega * e + g.ki_omega * st.e_int_omega + g.kd_omega * st.d_filt;
    const double omega_ref = clip(raw_omega, cfg.omega_ref_min, cfg.omega_ref_max);
    st.clamp_omega = (raw_omega > cfg.omega_ref_max && e > 0.0) ||
                     (raw_omega < cfg.omega_ref_min && e < 0.0);

    double beta_ref;
    if (mode == ActuationMode::rpm_only) {
        beta_ref = cfg.bias_beta;
        st.clamp_beta = false;
    } else {
        const double raw_beta =
            cfg.bias_beta + g.kp_beta * e + g.ki_beta * st.e_int_beta + g.kd_beta * st.d_filt;
        beta_ref = clip(raw_beta, cfg.beta_ref_min, cfg.beta_ref_max);
        st.clamp_beta = (raw_beta > cfg.beta_ref_max && e > 0.0) ||
                        (raw_beta < cfg.beta_ref_min && e < 0.0);
    }
    return {omega_ref, beta_ref};
}

TimeSeries closed_loop_simulate(const WienerParams& model, const PidGains& gains,
                                const ControlRunConfig& cfg, ActuationMode mode) {
    cfg.validate();
    model.validate();
    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_opt / cfg.dt)) + 1;
    const TimeGrid grid{cfg.dt, n_steps, 0.0};

    WienerState x{cfg.bias_omega, cfg.bias_beta, cfg.bias_omega, cfg.bias_beta};
    ControllerState st;

    TimeSeries ts(grid);
    auto& c_set = ts.add("thrust_set");
    auto& c_T = ts.add("thrust");
    auto& c_wr = ts.add("omega_ref");
    auto& c_br = ts.add("beta_ref");
    auto& c_w = ts.add("omega");
    auto& c_b = ts.add("beta");

    RateFn f = [&](double, std::span<const double> xs, std::span<const double> u,
                   std::span<double> rate) {
        const WienerState s{xs[0], xs[1], xs[2], xs[3]};
        const WienerState r = wiener_derivative(s, {u[0], u[1]}, model);
        rate[0] = r.d_omega;
        rate[1] = r.d_beta;
        rate[2] = r.x_omega;
        rate[3] = r.x_beta;
    };

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = grid.time(i);
        const double thrust = thrust_output(x.d_omega, x.d_beta, model);
        const double set = cfg.setpoint.at(t);
        const PidOutput out = pid_step(set - thrust, st, gains, cfg, cfg.dt, mode);

        c_set.push_back(set);
        c_T.push_back(thrust);
        c_wr.push_back(out.omega_ref);
        c_br.push_back(out.beta_ref);
        c_w.push_back(x.d_omega);
        c_b.push_back(x.d_beta);

        if (i + 1 < n_steps) {
            const std::array<double, 2> u = {out.omega_ref, out.beta_ref};
            auto xv = x.to_vector();
            rk4_step(f, t, xv, u, cfg.dt, xv);
            x = WienerState::from_vector(xv);
        }
    }
    ts.check_lengths();
    return ts;
}

double control_cost(const PidGains& gains, const WienerParams& model,
                    const ControlRunConfig& cfg, ActuationMode mode) {
    const TimeSeries ts = closed_loop_simulate(model, gains, cfg, mode);
    const auto& set = ts.at("thrust_set");
    const auto& thrust = ts.at("thrust");
    double tracking = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double e = set[i] - thrust[i];
        tracking += e * e * cfg.dt;
    }
    const auto gv = gains.to_vector();
    double norm2 = 0.0;
    const int n_active = mode == ActuationMode::rpm_only ? 3 : PidGains::kCount;
    for (int i = 0; i < n_active; ++i) norm2 += gv[i] * gv[i];
    return tracking + cfg.alpha * norm2;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> x0, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    if (n == 0) throw InvalidParameterError("nelder_mead needs at least one dimension");

    std::size_t n_evals = 0;
    auto eval = [&](std::span<const double> x) {
        ++n_evals;
        const double f = objective(x);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t i = 0; i < n; ++i) {
        double& c = simplex[i + 1][i];
        c += c != 0.0 ? opt.initial_scale * c : opt.zero_step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);
    if (!std::isfinite(fv[0]))
        throw NumericError("nelder_mead: objective is not finite at the start point");

    NelderMeadResult res;
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    while (n_evals < opt.max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        res.best_trace.push_back(fv[best]);

        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                size = std::max(size, std::abs(simplex[i][j] - simplex[best][j]));
        const double spread = std::isfinite(fv[worst]) ? fv[worst] - fv[best]
                                                       : std::numeric_limits<double>::infinity();
        if (size < opt.simplex_tol || spread < opt.f_tol) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
        const double fr = eval(xr);

        if (fr < fv[best]) {
            for (std::size_t j = 0; j < n; ++j)
                xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
            const double fe = eval(xe);
            simplex[worst] = fe < fr ? xe : xr;
            fv[worst] = std::min(fe, fr);
        } else if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const auto& base = outside ? xr : simplex[worst];
            for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + 0.5 * (base[j] - centroid[j]);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[worst])) {
                simplex[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    fv[i] = eval(simplex[i]);
                }
            }
        }
    }

    const std::size_t best =
        static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = simplex[best];
    res.f = fv[best];
    res.n_evals = n_evals;
    return res;
}

TuneReport tune_gains(const WienerParams& model, const ControlRunConfig& cfg, ActuationMode mode,
                      const PidGains& initial_guess) {
    cfg.validate();
    TuneReport report;
    PidGains g = initial_guess;
    g.kd_omega = g.kd_beta = 0.0;
    if (mode == ActuationMode::rpm_only) g.kp_beta = g.ki_beta = g.kd_beta = 0.0;

    // Stage 1: proportional and integral gains, derivative frozen at zero.
    {
        std::vector<double> x0 = {g.kp_omega, g.ki_omega};
        if (mode == ActuationMode::combined) {
            x0.push_back(g.kp_beta);
            x0.push_back(g.ki_beta);
        }
        auto objective = [&](std::span<const double> x) {
            PidGains trial = g;
            trial.kp_omega = x[0];
            trial.ki_omega = x[1];
            if (mode == ActuationMode::combined) {
                trial.kp_beta = x[2];
                trial.ki_beta = x[3];
            }
            return control_cost(trial, model, cfg, mode);
        };
        const auto res = nelder_mead(objective, x0);
        g.kp_omega = res.x[0];
        g.ki_omega = res.x[1];
        if (mode == ActuationMode::combined) {
            g.kp_beta = res.x[2];
            g.ki_beta = res.x[3];
        }
        report.stage1_cost = res.f;
        report.n_evals += res.n_evals;
    }

    // Stage 2: derivative gains only.
    {
        std::vector<double> x0 = {g.kd_omega};
        if (mode == ActuationMode::combined) x0.push_back(g.kd_beta);
        auto objective = [&](std::span<const double> x) {
            PidGains trial = g;
            trial.kd_omega = x[0];
            if (mode == ActuationMode::combined) trial.kd_beta = x[1];
            return control_cost(trial, model, cfg, mode);
        };
        const auto res = nelder_mead(objective, x0);
        g.kd_omega = res.x[0];
        if (mode == ActuationMode::combined) g.kd_beta = res.x[1];
        report.n_evals += res.n_evals;
    }

    report.gains = g;
    report.cost = control_cost(g, model, cfg, mode);
    return report;
}

}  // namespace vpp
