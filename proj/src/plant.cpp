#include "vpp/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace vpp {

namespace {

constexpr double kRadToRpm = 60.0 / (2.0 * std::numbers::pi);
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double PlantParams::disk_area() const { return std::numbers::pi * R * R; }

void PlantParams::validate() const {
    const double vals[] = {rho, R,   tau_lambda, J,   k_Q, k_omega, L_m,  R_m, V_in,
                           k_i, J_a, D_a,        k_a, L_a, R_a,     k_ia, V_in_actuator};
    for (double v : vals)
        if (!(v > 0.0)) throw InvalidParameterError("plant parameters must be strictly positive");
}

void LowLevelGains::validate() const {
    if (pi_kp < 0.0 || pi_ki < 0.0 || pd_kp < 0.0 || pd_kd < 0.0)
        throw InvalidParameterError("low-level gains must be non-negative");
}

double AeroMaps::c_thrust(double lambda, double b) const {
    return ct0 + ct_beta * b + ct_beta2 * b * b + ct_lambda * lambda;
}

double AeroMaps::c_torque(double lambda, double b) const {
    return cq0 + cq_beta * b + cq_lambda * lambda;
}

double AeroMaps::lambda_qs(double b) const { return lqs0 + lqs_beta * b; }

PlantState PlantState::from_vector(std::span<const double> v) {
    PlantState s;
    s.omega = v[0];
    s.I_m = v[1];
    s.lambda = v[2];
    s.beta = v[3];
    s.beta_dot = v[4];
    s.I_a = v[5];
    s.z_omega = v[6];
    return s;
}

double aero_torque(double omega, double beta_rad, const PlantParams& p, const AeroMaps& m) {
    const double lambda = m.lambda_qs(beta_rad);
    return 0.5 * p.rho * p.disk_area() * omega * omega * p.R * p.R * p.R *
           m.c_torque(lambda, beta_rad);
}

PlantState plant_derivative(const PlantState& s, double u_omega, double u_beta,
                            const PlantParams& p, const AeroMaps& m) {
    p.validate();
    u_omega = clip(u_omega, 0.0, 1.0);
    u_beta = clip(u_beta, -1.0, 1.0);

    const double q_aero = 0.5 * p.rho * p.disk_area() * s.omega * s.omega * p.R * p.R * p.R *
                          m.c_torque(s.lambda, s.beta);

    PlantState rate;
    rate.lambda = (m.lambda_qs(s.beta) - s.lambda) / p.tau_lambda;
    rate.omega = (p.k_Q * s.I_m - p.k_omega * s.omega - q_aero) / p.J;
    rate.I_m = (u_omega * p.V_in - p.R_m * s.I_m - p.k_i * s.omega) / p.L_m;
    rate.beta = s.beta_dot;
    rate.beta_dot = (p.k_a * s.I_a - p.D_a * s.beta_dot) / p.J_a;
    rate.I_a = (u_beta * p.V_in_actuator - p.R_a * s.I_a - p.k_ia * s.beta_dot) / p.L_a;
    rate.z_omega = 0.0;
    return rate;
}

double thrust_from_state(const PlantState& s, const PlantParams& p, const AeroMaps& m) {
    return 0.5 * p.rho * p.disk_area() * s.omega * s.omega * p.R * p.R *
           m.c_thrust(s.lambda, s.beta);
}

PlantState closed_loop_plant_derivative(const PlantState& s, double omega_ref, double beta_ref,
                                        const PlantParams& p, const AeroMaps& m,
                                        const LowLevelGains& g, double* u_omega_out,
                                        double* u_beta_out) {
    g.validate();
    const double e_rpm = (omega_ref - s.omega) * kRadToRpm;
    const double u_omega = clip(g.pi_kp * e_rpm + g.pi_ki * s.z_omega, 0.0, 1.0);
    const double e_deg = (beta_ref - s.beta) * kRadToDeg;
    const double u_beta = clip(g.pd_kp * e_deg - g.pd_kd * s.beta_dot * kRadToDeg, -1.0, 1.0);

    PlantState rate = plant_derivative(s, u_omega, u_beta, p, m);
    rate.z_omega = e_rpm;
    if (u_omega_out) *u_omega_out = u_omega;
    if (u_beta_out) *u_beta_out = u_beta;
    return rate;
}

PlantState steady_state(double omega_ref, double beta_ref, const PlantParams& p,
                        const AeroMaps& m, const LowLevelGains& g) {
    p.validate();
    g.validate();
    PlantState s;
    s.omega = omega_ref;
    s.beta = beta_ref;
    s.beta_dot = 0.0;
    s.I_a = 0.0;
    s.lambda = m.lambda_qs(beta_ref);
    const double q_aero = aero_torque(omega_ref, beta_ref, p, m);
    s.I_m = (p.k_omega * omega_ref + q_aero) / p.k_Q;
    const double u_omega = (p.R_m * s.I_m + p.k_i * omega_ref) / p.V_in;
    if (u_omega < 0.0 || u_omega > 1.0)
        throw NumericError("no steady state: required motor duty " + std::to_string(u_omega) +
                           " outside [0, 1]");
    if (g.pi_ki <= 0.0) throw NumericError("steady state needs an integral RPM gain");
    s.z_omega = u_omega / g.pi_ki;
    return s;
}

LinearizationPoint linearize(const PlantParams& p, const AeroMaps& m, const LowLevelGains& g,
                             double omega0, double beta0) {
    p.validate();
    g.validate();
    LinearizationPoint lp;
    lp.omega0 = omega0;
    lp.beta0 = beta0;

    // Torque Jacobians by central differences on the quasi-steady torque map.
    const double h_w = 1e-5 * std::max(std::abs(omega0), 1.0);
    const double h_b = 1e-5 * std::max(std::abs(beta0), 1.0);
    lp.c_q_omega =
        (aero_torque(omega0 + h_w, beta0, p, m) - aero_torque(omega0 - h_w, beta0, p, m)) /
        (2.0 * h_w);
    lp.c_q_beta =
        (aero_torque(omega0, beta0 + h_b, p, m) - aero_torque(omega0, beta0 - h_b, p, m)) /
        (2.0 * h_b);

    // Effective damping of the duty-driven rotor once the current state is
    // eliminated: viscous + back-EMF/resistance + torque-map slope.
    const double damping = p.k_omega + p.k_Q * p.k_i / p.R_m + lp.c_q_omega;
    if (damping <= 0.0) throw NumericError("linearize: non-positive effective rotor damping");
    lp.tau_omega = p.J / damping;
    const double drive = p.k_Q * p.V_in / (p.R_m * damping);  // per unit duty
    lp.K_P = drive * g.pi_kp * kRadToRpm;
    lp.K_I = drive * g.pi_ki * kRadToRpm;
    lp.K_beta = lp.c_q_beta / damping;

    lp.a_beta = (p.D_a + p.k_a * p.k_ia / p.R_a) / p.J_a;
    lp.b_beta = p.k_a * p.V_in_actuator / (p.J_a * p.R_a);

    auto solve_pair = [](double sum, double prod, const char* loop) {
        const double disc = sum * sum - 4.0 * prod;
        if (disc < 0.0)
            throw NumericError(std::string("linearize: complex closed-loop poles in the ") +
                               loop + " loop (sum " + std::to_string(sum) + ", product " +
                               std::to_string(prod) + ")");
        const double root = std::sqrt(disc);
        return std::pair<double, double>{0.5 * (sum + root), 0.5 * (sum - root)};
    };

    if (lp.K_I <= 0.0) throw NumericError("linearize: RPM loop needs a positive integral gain");
    const auto [tw1, tw2] = solve_pair((1.0 + lp.K_P) / lp.K_I, lp.tau_omega / lp.K_I, "RPM");
    lp.tau_omega_1 = tw1;
    lp.tau_omega_2 = tw2;

    const double kp_rad = g.pd_kp * kRadToDeg;
    const double kd_rad = g.pd_kd * kRadToDeg;
    if (lp.b_beta * kp_rad <= 0.0)
        throw NumericError("linearize: pitch loop needs a positive proportional gain");
    const auto [tb1, tb2] = solve_pair((lp.a_beta + lp.b_beta * kd_rad) / (lp.b_beta * kp_rad),
                                       1.0 / (lp.b_beta * kp_rad), "pitch");
    lp.tau_beta_1 = tb1;
    lp.tau_beta_2 = tb2;
    return lp;
}

std::size_t plant_substeps(double dt, const PlantParams& p) {
    const double tau_elec = std::min(p.L_m / p.R_m, p.L_a / p.R_a);
    const double h_max = 2.0 * tau_elec;
    if (dt <= h_max) return 1;
    return static_cast<std::size_t>(std::ceil(dt / h_max));
}

namespace {

void check_box(const RefSchedule& refs, const OperatingBox& box) {
    for (double w : refs.omega_ref_rpm)
        if (w < box.omega_min_rpm - 1e-9 || w > box.omega_max_rpm + 1e-9)
            throw DataError("RPM reference " + std::to_string(w) + " outside operating box [" +
                            std::to_string(box.omega_min_rpm) + ", " +
                            std::to_string(box.omega_max_rpm) + "]");
    for (double b : refs.beta_ref_deg)
        if (b < box.beta_min_deg - 1e-9 || b > box.beta_max_deg + 1e-9)
            throw DataError("pitch reference " + std::to_string(b) +
                            " outside operating box [" + std::to_string(box.beta_min_deg) +
                            ", " + std::to_string(box.beta_max_deg) + "]");
}

std::vector<double> apply_dead_band(const std::vector<double>& beta_ref, double width_deg) {
    if (width_deg <= 0.0) return beta_ref;
    std::vector<double> out(beta_ref.size());
    double applied = beta_ref.empty() ? 0.0 : beta_ref.front();
    for (std::size_t i = 0; i < beta_ref.size(); ++i) {
        if (std::abs(beta_ref[i] - applied) >= width_deg) applied = beta_ref[i];
        out[i] = applied;
    }
    return out;
}

template <typename Derivative, std::size_t Dim>
TimeSeries run_closed_loop(const RefSchedule& refs, const TimeGrid& grid, const PlantParams& p,
                           const AeroMaps& m, const LowLevelGains& g, const SimOptions& opt,
                           const OperatingBox& box, Derivative rate_of,
                           std::span<const double> x0, std::size_t substeps,
                           double (*thrust_of)(std::span<const double>, const PlantParams&,
                                               const AeroMaps&)) {
    grid.validate();
    if (refs.omega_ref_rpm.size() != grid.n_steps || refs.beta_ref_deg.size() != grid.n_steps)
        throw DataError("reference schedule length does not match the grid");
    check_box(refs, box);
    const auto beta_ref_applied = apply_dead_band(refs.beta_ref_deg, opt.dead_band_deg);

    RateFn f = [&](double, std::span<const double> x, std::span<const double> u,
                   std::span<double> rate) { rate_of(x, u[0], u[1], rate); };

    std::vector<double> u_si(2 * grid.n_steps);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        u_si[2 * i] = refs.omega_ref_rpm[i] / kRadToRpm;
        u_si[2 * i + 1] = beta_ref_applied[i] / kRadToDeg;
    }
    InputFn input = [&](std::size_t i) {
        return std::span<const double>(u_si.data() + 2 * i, 2);
    };

    const auto states = simulate(f, x0, input, grid, substeps);

    TimeSeries ts(grid);
    auto& c_wr = ts.add("omega_ref");
    auto& c_br = ts.add("beta_ref");
    auto& c_w = ts.add("omega");
    auto& c_b = ts.add("beta");
    auto& c_T = ts.add("thrust");
    const std::size_t n = x0.size();
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        std::span<const double> x(states.data() + i * n, n);
        c_wr.push_back(refs.omega_ref_rpm[i]);
        c_br.push_back(refs.beta_ref_deg[i]);
        c_w.push_back(x[0] * kRadToRpm);
        c_b.push_back(x[Dim == PlantState::kDim ? 3 : 2] * kRadToDeg);
        c_T.push_back(thrust_of(x, p, m));
    }
    if (opt.sigma_thrust > 0.0) {
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> noise(0.0, opt.sigma_thrust);
        for (double& v : c_T) v += noise(rng);
    }
    ts.check_lengths();
    return ts;
}

}  // namespace

TimeSeries simulate_closed_loop_plant(const RefSchedule& refs, const TimeGrid& grid,
                                      const PlantParams& p, const AeroMaps& m,
                                      const LowLevelGains& g, const SimOptions& opt,
                                      const OperatingBox& box) {
    if (refs.omega_ref_rpm.empty()) throw DataError("empty reference schedule");
    const PlantState s0 =
        steady_state(refs.omega_ref_rpm.front() / kRadToRpm, refs.beta_ref_deg.front() / kRadToDeg,
                     p, m, g);
    const auto x0 = s0.to_vector();

    auto rate_of = [&](std::span<const double> x, double w_ref, double b_ref,
                       std::span<double> rate) {
        const PlantState s = PlantState::from_vector(x);
        const PlantState r = closed_loop_plant_derivative(s, w_ref, b_ref, p, m, g);
        const auto rv = r.to_vector();
        std::copy(rv.begin(), rv.end(), rate.begin());
    };
    auto thrust_of = +[](std::span<const double> x, const PlantParams& pp, const AeroMaps& mm) {
        return thrust_from_state(PlantState::from_vector(x), pp, mm);
    };
    return run_closed_loop<decltype(rate_of), PlantState::kDim>(
        refs, grid, p, m, g, opt, box, rate_of, x0, plant_substeps(grid.dt, p), thrust_of);
}

TimeSeries simulate_closed_loop_plant_reduced(const RefSchedule& refs, const TimeGrid& grid,
                                              const PlantParams& p, const AeroMaps& m,
                                              const LowLevelGains& g, const SimOptions& opt,
                                              const OperatingBox& box) {
    if (refs.omega_ref_rpm.empty()) throw DataError("empty reference schedule");
    const PlantState s0 =
        steady_state(refs.omega_ref_rpm.front() / kRadToRpm, refs.beta_ref_deg.front() / kRadToDeg,
                     p, m, g);
    // Reduced state: omega, lambda, beta, beta_dot, z_omega.
    const std::array<double, 5> x0 = {s0.omega, s0.lambda, s0.beta, s0.beta_dot, s0.z_omega};

    auto rate_of = [&](std::span<const double> x, double w_ref, double b_ref,
                       std::span<double> rate) {
        const double omega = x[0], lambda = x[1], beta = x[2], beta_dot = x[3], z = x[4];
        const double e_rpm = (w_ref - omega) * kRadToRpm;
        const double u_w = clip(g.pi_kp * e_rpm + g.pi_ki * z, 0.0, 1.0);
        const double e_deg = (b_ref - beta) * kRadToDeg;
        const double u_b = clip(g.pd_kp * e_deg - g.pd_kd * beta_dot * kRadToDeg, -1.0, 1.0);
        const double i_m = (u_w * p.V_in - p.k_i * omega) / p.R_m;
        const double i_a = (u_b * p.V_in_actuator - p.k_ia * beta_dot) / p.R_a;
        const double q_aero = 0.5 * p.rho * p.disk_area() * omega * omega * p.R * p.R * p.R *
                              m.c_torque(lambda, beta);
        rate[0] = (p.k_Q * i_m - p.k_omega * omega - q_aero) / p.J;
        rate[1] = (m.lambda_qs(beta) - lambda) / p.tau_lambda;
        rate[2] = beta_dot;
        rate[3] = (p.k_a * i_a - p.D_a * beta_dot) / p.J_a;
        rate[4] = e_rpm;
    };
    auto thrust_of = +[](std::span<const double> x, const PlantParams& pp, const AeroMaps& mm) {
        return 0.5 * pp.rho * pp.disk_area() * x[0] * x[0] * pp.R * pp.R *
               mm.c_thrust(x[1], x[2]);
    };
    return run_closed_loop<decltype(rate_of), 5>(refs, grid, p, m, g, opt, box, rate_of, x0, 1,
                                                 thrust_of);
}

TimeSeries generate_step_record(const StepRecordSpec& spec, double dt, const PlantParams& p,
                                const AeroMaps& m, const LowLevelGains& g, const SimOptions& opt,
                                const OperatingBox& box) {
    const auto n_pre = static_cast<std::size_t>(std::llround(spec.pre_step / dt));
    const auto n_post = static_cast<std::size_t>(std::llround(spec.post_step / dt));
    if (n_pre < 2 || n_post < 2) throw DataError("step record phases too short for the grid");
    const TimeGrid grid{dt, n_pre + n_post, 0.0};

    RefSchedule refs;
    refs.omega_ref_rpm.resize(grid.n_steps);
    refs.beta_ref_deg.resize(grid.n_steps);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double level = i < n_pre ? spec.start_level : spec.end_level;
        if (spec.omega_channel) {
            refs.omega_ref_rpm[i] = level;
            refs.beta_ref_deg[i] = spec.hold_other;
        } else {
            refs.omega_ref_rpm[i] = spec.hold_other;
            refs.beta_ref_deg[i] = level;
        }
    }
    return simulate_closed_loop_plant(refs, grid, p, m, g, opt, box);
}

}  // namespace vpp
