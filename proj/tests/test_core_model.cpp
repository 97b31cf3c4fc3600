#include <cmath>
#include <random>

#include "doctest.h"
#include "vpp/core_model.hpp"
#include "vpp/ode.hpp"

using namespace vpp;

namespace {

// Coefficient set used by several fixtures below: the refined model whose
// value at (1, 1) sums to 0.978 by hand.
WienerParams refined_model() {
    WienerParams p;
    p.c20 = 0.355;
    p.c11 = 0.064;
    p.c21 = 0.8;
    p.c12 = -0.16;
    p.c30 = -0.081;
    return p;
}

}  // namespace

TEST_CASE("wiener_derivative equilibria and single-entry evaluation") {
    WienerParams p;

    WienerState rate = wiener_derivative({}, {}, p);
    CHECK(rate.d_omega == 0.0);
    CHECK(rate.d_beta == 0.0);
    CHECK(rate.x_omega == 0.0);
    CHECK(rate.x_beta == 0.0);

    // Unit speed reference from rest only drives the first lag state:
    // x_omega rate = (ref - x_omega)/tau_omega_2 = 1/0.05 = 20.
    p.tau_omega_2 = 0.05;
    rate = wiener_derivative({}, {1.0, 0.0}, p);
    CHECK(rate.d_omega == doctest::Approx(0.0));
    CHECK(rate.d_beta == 0.0);
    CHECK(rate.x_omega == doctest::Approx(20.0));
    CHECK(rate.x_beta == 0.0);

    // All states at the references is the unity-DC-gain equilibrium.
    rate = wiener_derivative({1.0, 1.0, 1.0, 1.0}, {1.0, 1.0}, WienerParams{});
    CHECK(rate.d_omega == doctest::Approx(0.0));
    CHECK(rate.d_beta == doctest::Approx(0.0));
    CHECK(rate.x_omega == doctest::Approx(0.0));
    CHECK(rate.x_beta == doctest::Approx(0.0));
}

TEST_CASE("wiener_derivative rejects non-positive time constants") {
    WienerParams p;
    p.tau_beta_1 = 0.0;
    CHECK_THROWS_AS(wiener_derivative({}, {}, p), InvalidParameterError);
    p.tau_beta_1 = -0.1;
    CHECK_THROWS_AS(wiener_derivative({}, {}, p), InvalidParameterError);
}

TEST_CASE("thrust_output fixture values") {
    const WienerParams p = refined_model();
    for (double b : {-1.0, 0.0, 0.3, 1.0}) CHECK(thrust_output(0.0, b, p) == 0.0);
    CHECK(thrust_output(1.0, 1.0, p) == doctest::Approx(0.978).epsilon(1e-12));
    CHECK(thrust_output(1.0, 0.0, p) == doctest::Approx(0.274).epsilon(1e-12));
}

TEST_CASE("thrust_output is a cubic polynomial along any ray") {
    // Fourth finite differences of a degree-3 polynomial vanish to round-off.
    const WienerParams p = refined_model();
    const double h = 0.1;
    for (double b0 : {0.2, 0.7}) {
        double d4 = 0.0;
        const int signs[] = {1, -4, 6, -4, 1};
        for (int k = 0; k < 5; ++k) d4 += signs[k] * thrust_output(0.3 + k * h, b0, p);
        CHECK(std::abs(d4) < 1e-12);
    }
}

TEST_CASE("normalization round trips and reference points") {
    Normalization n;
    NormalizedTriple t = normalize(6000.0, 10.0, 15.0, n);
    CHECK(t.omega_n == doctest::Approx(1.0));
    CHECK(t.beta_n == doctest::Approx(1.0));
    CHECK(t.thrust_n == doctest::Approx(1.0));

    t = normalize(0.0, -5.0, 0.0, n);
    CHECK(t.omega_n == 0.0);
    CHECK(t.beta_n == 0.0);
    CHECK(t.thrust_n == 0.0);

    t = normalize(3571.0, 2.3, 7.7, n);
    double w, b, T;
    denormalize(t, n, w, b, T);
    CHECK(w == doctest::Approx(3571.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(2.3).epsilon(1e-12));
    CHECK(T == doctest::Approx(7.7).epsilon(1e-12));
}

TEST_CASE("output_jacobians hand values and finite-difference agreement") {
    WienerParams ones;
    ones.c20 = ones.c11 = ones.c21 = ones.c12 = ones.c30 = 1.0;

    OutputJacobians j = output_jacobians(0.0, 0.0, ones);
    CHECK(j.dh_domega == 0.0);
    for (double m : j.dh_dcoeff) CHECK(m == 0.0);

    // d/dw of w^2 + wb + w^2 b + w b^2 + w^3 at (1,1) is 2+1+2+1+3 = 9.
    j = output_jacobians(1.0, 1.0, ones);
    CHECK(j.dh_domega == doctest::Approx(9.0));

    const WienerParams p = refined_model();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const double w = u(rng), b = u(rng);
        j = output_jacobians(w, b, p);
        const double fd_w = (thrust_output(w + h, b, p) - thrust_output(w - h, b, p)) / (2 * h);
        const double fd_b = (thrust_output(w, b + h, p) - thrust_output(w, b - h, p)) / (2 * h);
        CHECK(j.dh_domega == doctest::Approx(fd_w).epsilon(1e-6));
        CHECK(j.dh_dbeta == doctest::Approx(fd_b).epsilon(1e-6));
        // Monomial vector reassembles the output value.
        const auto c = std::array<double, 5>{p.c20, p.c11, p.c21, p.c12, p.c30};
        double sum = 0.0;
        for (int k = 0; k < 5; ++k) sum += c[k] * j.dh_dcoeff[k];
        CHECK(sum == doctest::Approx(thrust_output(w, b, p)).epsilon(1e-12));
    }
}

namespace {

std::vector<double> simulate_wiener(const WienerParams& p, const RefInput& refs, double t_end,
                                    WienerState x0 = {}) {
    const TimeGrid grid{0.004, static_cast<std::size_t>(t_end / 0.004) + 1, 0.0};
    const std::array<double, 2> u{refs.omega_ref, refs.beta_ref};
    RateFn f = [&p](double, std::span<const double> x, std::span<const double> uu,
                    std::span<double> r) {
        const WienerState rate = wiener_derivative(WienerState::from_vector({x[0], x[1], x[2], x[3]}),
                                                   {uu[0], uu[1]}, p);
        const auto rv = rate.to_vector();
        std::copy(rv.begin(), rv.end(), r.begin());
    };
    return simulate(f, x0.to_vector(), [&u](std::size_t) { return std::span<const double>(u); },
                    grid);
}

}  // namespace

TEST_CASE("each reference chain has unity DC gain") {
    WienerParams p;
    const double t_end = 20.0 * std::max({p.tau_omega_1, p.tau_omega_2, p.tau_beta_1,
                                          p.tau_beta_2});
    const auto traj = simulate_wiener(p, {0.8, 0.4}, t_end);
    const std::size_t last = traj.size() - 4;
    CHECK(traj[last + 0] == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(traj[last + 1] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(traj[last + 2] == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(traj[last + 3] == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("linear dynamics superpose from zero state") {
    WienerParams p;
    const auto a = simulate_wiener(p, {0.5, 0.1}, 2.0);
    const auto b = simulate_wiener(p, {0.2, 0.6}, 2.0);
    const auto ab = simulate_wiener(p, {0.7, 0.7}, 2.0);
    for (std::size_t i = 0; i < ab.size(); ++i)
        CHECK(ab[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-9));
}
