#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "vpp/config.hpp"
#include "vpp/ident.hpp"
#include "vpp/pipeline.hpp"

using namespace vpp;

namespace {

// Published-figure physical-unit thrust map (RPM/deg/N basis) used as a
// self-consistency fixture for the least-squares fit.
const std::array<double, 5> kPhysicalCoeffs = {0.21e-6, -5.7e-6, 0.023e-6, -1.25e-6,
                                               -2.15e-12};

std::vector<StaticSample> physical_grid_samples() {
    std::vector<StaticSample> samples;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double w = 2000.0 + 4000.0 * i / 9.0;
            const double b = -5.0 + 15.0 * j / 9.0;
            samples.push_back({w, b, eval_static_map(kPhysicalCoeffs, w, b)});
        }
    }
    return samples;
}

std::vector<double> sampled_two_lag(double tau1, double tau2, double dt, std::size_t n) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = second_order_step_response(dt * static_cast<double>(i), tau1, tau2);
    return y;
}

}  // namespace

TEST_CASE("static map fit recovers its own model class exactly") {
    const auto samples = physical_grid_samples();
    const StaticMapFit fit = fit_static_map(samples);
    for (int k = 0; k < 5; ++k)
        CHECK(fit.coeffs[k] == doctest::Approx(kPhysicalCoeffs[k]).epsilon(1e-9));
    CHECK(fit.adjusted_r2 == doctest::Approx(1.0).epsilon(1e-12));
    for (double r : fit.residuals) CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("static map fit edge cases") {
    auto samples = physical_grid_samples();
    for (auto& s : samples) s.thrust = 0.0;
    const StaticMapFit zero = fit_static_map(samples);
    for (double c : zero.coeffs) CHECK(std::abs(c) < 1e-15);

    std::vector<StaticSample> degenerate(20, {3000.0, 2.0, 5.0});
    CHECK_THROWS_AS(fit_static_map(degenerate), DataError);
    CHECK_THROWS_AS(fit_static_map({}), DataError);

    // Truncation drops out-of-window pitch samples before fitting.
    auto poisoned = physical_grid_samples();
    poisoned.push_back({4000.0, -8.0, 99.0});
    const StaticMapFit fit = fit_static_map(poisoned, -5.0, 10.0);
    for (int k = 0; k < 5; ++k)
        CHECK(fit.coeffs[k] == doctest::Approx(kPhysicalCoeffs[k]).epsilon(1e-9));
}

TEST_CASE("physical-to-normalized coefficient rewrite is exact") {
    Normalization n;
    const auto ext = physical_to_normalized_extended(kPhysicalCoeffs, n);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uw(2000.0, 6000.0), ub(-5.0, 10.0);
    for (int i = 0; i < 50; ++i) {
        const double w = uw(rng), b = ub(rng);
        const double direct = eval_static_map(kPhysicalCoeffs, w, b);
        const double via_norm =
            eval_extended_map(ext, n.omega_to_n(w), n.beta_to_n(b)) * n.thrust_scale;
        CHECK(via_norm == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("thrust coefficient definition") {
    const double rho = 1.225, D = 0.254;
    const double n_revs = 3000.0 / 60.0;
    CHECK(thrust_coefficient(rho * n_revs * n_revs * std::pow(D, 4), 3000.0, rho, D) ==
          doctest::Approx(1.0).epsilon(1e-12));
    const double c1 = thrust_coefficient(5.0, 3000.0, rho, D);
    CHECK(thrust_coefficient(5.0, 6000.0, rho, D) == doctest::Approx(c1 / 4.0).epsilon(1e-12));
    CHECK_THROWS_AS(thrust_coefficient(5.0, 0.0, rho, D), NumericError);
}

TEST_CASE("speed has minor impact on the rig's thrust coefficient") {
    // At fixed pitch the desk-rig static map gives a nearly speed-independent
    // propeller thrust coefficient (variation under 5%).
    RunConfig cfg;
    cfg.sigma_thrust = 0.0;
    const auto samples = generate_static_samples(cfg);
    const double D = 2.0 * cfg.plant.R;
    // Group by grid pitch level; within each level the coefficient barely moves.
    std::size_t groups_checked = 0;
    for (const auto& anchor : samples) {
        if (std::abs(anchor.omega - cfg.static_grid.omega_min) > 1e-9) continue;
        double c_min = 1e300, c_max = -1e300, c_abs = 0.0;
        for (const auto& s : samples) {
            if (std::abs(s.beta - anchor.beta) > 1e-9) continue;
            const double c = thrust_coefficient(s.thrust, s.omega, cfg.plant.rho, D);
            c_min = std::min(c_min, c);
            c_max = std::max(c_max, c);
            c_abs = std::max(c_abs, std::abs(c));
        }
        CHECK((c_max - c_min) / c_abs < 0.05);
        ++groups_checked;
    }
    CHECK(groups_checked == cfg.static_grid.n_beta);
}

TEST_CASE("step-response normalization") {
    TimeGrid grid{0.004, 2500, 0.0};
    TimeSeries ts(grid);
    auto& thrust = ts.add("thrust");
    thrust.assign(2500, 2.0);
    for (std::size_t i = 1250; i < 2500; ++i) thrust[i] = 6.0;
    const auto norm = normalize_step_response(ts, 5.0);
    CHECK(norm.y.front() == doctest::Approx(0.0));
    CHECK(norm.y.back() == doctest::Approx(1.0));
    CHECK(norm.pre_mean == doctest::Approx(2.0));
    CHECK(norm.post_mean == doctest::Approx(6.0));

    // Flat trace: the amplitude sits below any noise floor.
    TimeSeries flat(grid);
    auto& ft = flat.add("thrust");
    ft.assign(2500, 2.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 0.05);
    for (auto& v : ft) v += g(rng);
    CHECK_THROWS_AS(normalize_step_response(flat, 5.0), DataError);
}

TEST_CASE("two-lag step response closed form") {
    CHECK(second_order_step_response(0.0, 0.15, 0.04) == doctest::Approx(0.0));
    CHECK(second_order_step_response(50.0, 0.15, 0.04) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(second_order_step_response(0.1, 0.1, 0.1) ==
          doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-9));
    for (double t : {0.05, 0.2, 0.7})
        CHECK(second_order_step_response(t, 0.15, 0.04) ==
              doctest::Approx(second_order_step_response(t, 0.04, 0.15)).epsilon(1e-12));
    CHECK_THROWS_AS(second_order_step_response(0.1, 0.0, 0.1), InvalidParameterError);
}

TEST_CASE("time-constant fit: noiseless recovery and degenerate limit") {
    const double dt = 0.004;
    const auto y = sampled_two_lag(0.15, 0.04, dt, 1250);
    const TimeConstantFit fit = fit_time_constants(y, dt);
    CHECK(fit.tau_1 == doctest::Approx(0.15).epsilon(0.01));
    CHECK(fit.tau_2 == doctest::Approx(0.04).epsilon(0.01));
    CHECK(fit.tau_1 >= fit.tau_2);
    CHECK_FALSE(fit.poor_fit);

    // First-order data: the second lag collapses to (or below) the sample step.
    std::vector<double> y1(1250);
    for (std::size_t i = 0; i < y1.size(); ++i)
        y1[i] = 1.0 - std::exp(-dt * static_cast<double>(i) / 0.15);
    const TimeConstantFit f1 = fit_time_constants(y1, dt);
    CHECK(f1.tau_1 == doctest::Approx(0.15).epsilon(0.02));
    CHECK(f1.tau_2 <= dt + 1e-9);
}

TEST_CASE("time-constant estimator is consistent as noise vanishes") {
    const double dt = 0.004;
    const auto clean = sampled_two_lag(0.15, 0.04, dt, 1250);
    std::vector<double> medians;
    for (double sigma : {0.05, 0.01, 0.001}) {
        std::vector<double> errs;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g(0.0, sigma);
            std::vector<double> y = clean;
            for (auto& v : y) v += g(rng);
            const TimeConstantFit fit = fit_time_constants(y, dt);
            errs.push_back(std::max(std::abs(fit.tau_1 - 0.15) / 0.15,
                                    std::abs(fit.tau_2 - 0.04) / 0.04));
        }
        std::nth_element(errs.begin(), errs.begin() + 10, errs.end());
        medians.push_back(errs[10]);
    }
    CHECK(medians[0] > medians[1]);
    CHECK(medians[1] > medians[2]);
    CHECK(medians[2] < 0.01);
}

TEST_CASE("amplitude invariance of the fit after re-normalization") {
    const double dt = 0.004;
    auto y = sampled_two_lag(0.2, 0.05, dt, 1250);
    const TimeConstantFit base = fit_time_constants(y, dt);
    // Scale then re-normalize to a unit step: identical estimates.
    for (auto& v : y) v = (3.0 * v) / 3.0;
    const TimeConstantFit again = fit_time_constants(y, dt);
    CHECK(base.tau_1 == again.tau_1);
    CHECK(base.tau_2 == again.tau_2);
}

TEST_CASE("averaging across experiments") {
    StepExperiment a, b;
    a.valid = true;
    a.fitted = {0.14, 0.04, 0.0, false};
    b.valid = true;
    b.fitted = {0.16, 0.04, 0.0, false};
    auto [t1, t2] = average_time_constants({a, b});
    CHECK(t1 == doctest::Approx(0.15));
    CHECK(t2 == doctest::Approx(0.04));
    CHECK(average_time_constants({a}).first == doctest::Approx(0.14));
    StepExperiment bad;
    bad.valid = false;
    CHECK_THROWS_AS(average_time_constants({bad}), DataError);
}
