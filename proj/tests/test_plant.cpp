#include <cmath>

#include "doctest.h"
#include "vpp/config.hpp"
#include "vpp/plant.hpp"

using namespace vpp;

namespace {

constexpr double kPi = 3.14159265358979323846;
double rpm_to_rad(double rpm) { return rpm * 2.0 * kPi / 60.0; }
double deg_to_rad(double deg) { return deg * kPi / 180.0; }

LowLevelGains rig_gains() { return RunConfig{}.gains; }

double rate_norm(const PlantState& r) {
    double n = 0.0;
    for (double v : r.to_vector()) n = std::max(n, std::abs(v));
    return n;
}

}  // namespace

TEST_CASE("open-plant rates at distinguished points") {
    PlantParams p;
    AeroMaps m;

    // With a quasi-steady inflow map vanishing at zero pitch, the origin with
    // zero drive is a fixed point of the open plant.
    AeroMaps rest = m;
    rest.lqs0 = 0.0;
    CHECK(rate_norm(plant_derivative({}, 0.0, 0.0, p, rest)) == 0.0);

    // Stalled motor at full duty: current ramps at V_in / L_m exactly.
    PlantState s;
    const PlantState r = plant_derivative(s, 1.0, 0.0, p, rest);
    CHECK(r.I_m == doctest::Approx(p.V_in / p.L_m).epsilon(1e-15));

    PlantParams bad = p;
    bad.J = 0.0;
    CHECK_THROWS_AS(plant_derivative(s, 0.0, 0.0, bad, m), InvalidParameterError);
}

TEST_CASE("constructed steady states are fixed points of the closed loop") {
    PlantParams p;
    AeroMaps m;
    const LowLevelGains g = rig_gains();
    for (double rpm : {2500.0, 4000.0, 5500.0}) {
        for (double deg : {-5.0, 2.5, 9.0}) {
            const double w = rpm_to_rad(rpm), b = deg_to_rad(deg);
            const PlantState s = steady_state(w, b, p, m, g);
            double u_w = -1.0, u_b = -1.0;
            const PlantState rate = closed_loop_plant_derivative(s, w, b, p, m, g, &u_w, &u_b);
            // z_omega integrates the RPM error, which is zero here.
            CHECK(rate_norm(rate) < 1e-9);
            CHECK(u_w == doctest::Approx((p.R_m * s.I_m + p.k_i * w) / p.V_in).epsilon(1e-12));
            CHECK(u_b == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("thrust evaluation and map inversion") {
    PlantParams p;
    AeroMaps m;
    PlantState s;
    s.lambda = 0.06;
    s.beta = deg_to_rad(4.0);
    CHECK(thrust_from_state(s, p, m) == 0.0);

    s.omega = rpm_to_rad(3000.0);
    const double t1 = thrust_from_state(s, p, m);
    s.omega *= 2.0;
    CHECK(thrust_from_state(s, p, m) == doctest::Approx(4.0 * t1).epsilon(1e-12));

    // Inverting the definition recovers the generating thrust-coefficient map.
    const double dyn = 0.5 * p.rho * p.disk_area() * (s.omega * p.R) * (s.omega * p.R);
    CHECK(thrust_from_state(s, p, m) / dyn ==
          doctest::Approx(m.c_thrust(s.lambda, s.beta)).epsilon(1e-12));
}

TEST_CASE("large speed step saturates the motor duty initially") {
    PlantParams p;
    AeroMaps m;
    // A stiff proportional speed loop: a 4000 RPM error demands duty far
    // beyond 1, so the applied duty must be pinned at the upper clip.
    const LowLevelGains g{1e-3, 2e-3, 10.0, 10.0};
    const PlantState s = steady_state(rpm_to_rad(2000.0), deg_to_rad(2.5), p, m, g);
    double u_w = 0.0;
    closed_loop_plant_derivative(s, rpm_to_rad(6000.0), deg_to_rad(2.5), p, m, g, &u_w,
                                 nullptr);
    CHECK(u_w == 1.0);
}

TEST_CASE("pitch loop tracks a reference step") {
    StepRecordSpec spec;
    spec.omega_channel = false;
    spec.start_level = -2.0;
    spec.end_level = 6.0;
    spec.hold_other = 4000.0;
    PlantParams p;
    AeroMaps m;
    const TimeSeries rec = generate_step_record(spec, 0.004, p, m, rig_gains(), {});
    CHECK(rec.at("beta").back() == doctest::Approx(6.0).epsilon(1e-3));
    // Small overshoot at most.
    double beta_max = -90.0;
    for (double b : rec.at("beta")) beta_max = std::max(beta_max, b);
    CHECK(beta_max < 6.0 + 0.1 * 8.0);
}

TEST_CASE("linearize satisfies its sum/product construction") {
    PlantParams p;
    AeroMaps m;
    const LowLevelGains g = rig_gains();
    const LinearizationPoint lp = linearize(p, m, g, rpm_to_rad(4000.0), deg_to_rad(2.5));
    CHECK(lp.tau_omega_1 >= lp.tau_omega_2);
    CHECK(lp.tau_beta_1 >= lp.tau_beta_2);
    CHECK(lp.tau_omega_2 > 0.0);
    CHECK(lp.tau_beta_2 > 0.0);
    // The returned pairs reproduce the sum and product relations they solve.
    CHECK(lp.tau_omega_1 + lp.tau_omega_2 ==
          doctest::Approx((1.0 + lp.K_P) / lp.K_I).epsilon(1e-10));
    CHECK(lp.tau_omega_1 * lp.tau_omega_2 ==
          doctest::Approx(lp.tau_omega / lp.K_I).epsilon(1e-10));

    // Symmetric pair when the discriminant vanishes: a pure PD pitch loop with
    // gains chosen so (sum)^2 = 4 * product collapses to tau_1 = tau_2.
    const double kp_rad = g.pd_kp * 180.0 / kPi;
    LowLevelGains sym = g;
    // sum = (a + b kd)/(b kp), product = 1/(b kp): pick kd so sum^2 = 4 prod.
    const double target_sum = 2.0 * std::sqrt(1.0 / (lp.b_beta * kp_rad));
    sym.pd_kd = (target_sum * lp.b_beta * kp_rad - lp.a_beta) / lp.b_beta / (180.0 / kPi);
    const LinearizationPoint lps = linearize(p, m, sym, rpm_to_rad(4000.0), deg_to_rad(2.5));
    CHECK(lps.tau_beta_1 == doctest::Approx(lps.tau_beta_2).epsilon(1e-5));
}

TEST_CASE("desk-rig linearization lands near the identified time constants") {
    PlantParams p;
    AeroMaps m;
    const LinearizationPoint lp =
        linearize(p, m, rig_gains(), rpm_to_rad(4000.0), deg_to_rad(2.5));
    CHECK(lp.tau_omega_1 == doctest::Approx(0.155).epsilon(0.15));
    CHECK(lp.tau_omega_2 == doctest::Approx(0.039).epsilon(0.15));
    CHECK(lp.tau_beta_1 == doctest::Approx(0.28).epsilon(0.15));
    CHECK(lp.tau_beta_2 == doctest::Approx(0.11).epsilon(0.15));
}

TEST_CASE("data generator: noise enters only the thrust channel, seeded") {
    StepRecordSpec spec;
    spec.start_level = 2000.0;
    spec.end_level = 4000.0;
    spec.hold_other = 2.5;
    spec.pre_step = 1.0;
    spec.post_step = 1.0;
    PlantParams p;
    AeroMaps m;
    const LowLevelGains g = rig_gains();

    const TimeSeries clean1 = generate_step_record(spec, 0.004, p, m, g, {0.0, 1});
    const TimeSeries clean2 = generate_step_record(spec, 0.004, p, m, g, {0.0, 99});
    CHECK(clean1.at("thrust") == clean2.at("thrust"));  // sigma = 0: seed-independent

    const TimeSeries noisy = generate_step_record(spec, 0.004, p, m, g, {0.05, 1});
    CHECK(noisy.at("omega") == clean1.at("omega"));
    CHECK(noisy.at("beta") == clean1.at("beta"));
    CHECK(noisy.at("thrust") != clean1.at("thrust"));

    const TimeSeries noisy2 = generate_step_record(spec, 0.004, p, m, g, {0.05, 1});
    CHECK(noisy.at("thrust") == noisy2.at("thrust"));  // identical seed, identical noise
}

TEST_CASE("references outside the operating box are rejected") {
    RefSchedule refs;
    refs.omega_ref_rpm = {7000.0};
    refs.beta_ref_deg = {0.0};
    const TimeGrid grid{0.004, 10, 0.0};
    PlantParams p;
    AeroMaps m;
    CHECK_THROWS_AS(simulate_closed_loop_plant(refs, grid, p, m, rig_gains(), {}), DataError);
}
