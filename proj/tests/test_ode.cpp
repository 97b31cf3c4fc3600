#include <cmath>
#include <limits>

#include "doctest.h"
#include "vpp/ident.hpp"
#include "vpp/ode.hpp"

using namespace vpp;

namespace {

const RateFn decay = [](double, std::span<const double> x, std::span<const double>,
                        std::span<double> r) { r[0] = -x[0]; };
const double no_input_storage[1] = {0.0};
std::span<const double> no_input(std::size_t) { return {no_input_storage, 0}; }

}  // namespace

TEST_CASE("rk4_step basic oracles") {
    double x0 = 7.0, x1 = 0.0;
    RateFn zero = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> r) { r[0] = 0.0; };
    rk4_step(zero, 0.0, {&x0, 1}, {}, 0.004, {&x1, 1});
    CHECK(x1 == 7.0);

    x0 = 1.0;
    rk4_step(decay, 0.0, {&x0, 1}, {}, 0.1, {&x1, 1});
    CHECK(x1 == doctest::Approx(std::exp(-0.1)).epsilon(1e-6));

    RateFn one = [](double, std::span<const double>, std::span<const double>,
                    std::span<double> r) { r[0] = 1.0; };
    x0 = 0.0;
    rk4_step(one, 0.0, {&x0, 1}, {}, 0.004, {&x1, 1});
    CHECK(x1 == doctest::Approx(0.004).epsilon(1e-15));
}

TEST_CASE("rk4_step reports non-finite rates and bad steps") {
    RateFn nan_rate = [](double, std::span<const double>, std::span<const double>,
                         std::span<double> r) { r[0] = std::numeric_limits<double>::quiet_NaN(); };
    double x0 = 1.0, x1 = 0.0;
    CHECK_THROWS_AS(rk4_step(nan_rate, 0.0, {&x0, 1}, {}, 0.1, {&x1, 1}), NumericError);
    CHECK_THROWS_AS(rk4_step(decay, 0.0, {&x0, 1}, {}, 0.0, {&x1, 1}), InvalidParameterError);
}

TEST_CASE("simulate: constant trajectory under zero dynamics") {
    RateFn zero = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> r) { r[0] = 0.0; };
    const double x0 = 3.5;
    auto traj = simulate(zero, {&x0, 1}, no_input, {0.01, 50, 0.0});
    for (double v : traj) CHECK(v == 3.5);
}

TEST_CASE("simulate matches the analytic two-lag step response") {
    const double tau1 = 0.15, tau2 = 0.04;
    RateFn cascade = [&](double, std::span<const double> x, std::span<const double> u,
                         std::span<double> r) {
        r[0] = (x[1] - x[0]) / tau1;  // output lag
        r[1] = (u[0] - x[1]) / tau2;  // input lag
    };
    const double u_step[1] = {1.0};
    const double x0[2] = {0.0, 0.0};
    const TimeGrid grid{0.004, 500, 0.0};
    auto traj = simulate(cascade, {x0, 2}, [&](std::size_t) {
        return std::span<const double>(u_step, 1);
    }, grid);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double y_ref = second_order_step_response(grid.time(i), tau1, tau2);
        CHECK(traj[2 * i] == doctest::Approx(y_ref).epsilon(1e-6));
    }
}

TEST_CASE("simulate converges under step refinement") {
    const double x0 = 1.0;
    auto coarse = simulate(decay, {&x0, 1}, no_input, {0.01, 101, 0.0});
    auto fine = simulate(decay, {&x0, 1}, no_input, {0.005, 201, 0.0});
    CHECK(std::abs(coarse.back() - fine.back()) < 1e-8);

    // Fourth-order convergence: halving dt shrinks the end-point error by
    // nearly 16x on the exponential test over [0, 1].
    const double exact = std::exp(-1.0);
    const double err_coarse = std::abs(simulate(decay, {&x0, 1}, no_input,
                                                {0.1, 11, 0.0}).back() - exact);
    const double err_fine = std::abs(simulate(decay, {&x0, 1}, no_input,
                                              {0.05, 21, 0.0}).back() - exact);
    CHECK(err_coarse / err_fine >= 14.0);
}

TEST_CASE("linear simulation scales with the input and is deterministic") {
    RateFn lin = [](double, std::span<const double> x, std::span<const double> u,
                    std::span<double> r) { r[0] = -2.0 * x[0] + u[0]; };
    const double x0 = 0.0;
    const double u1[1] = {0.7}, u3[1] = {2.1};
    const TimeGrid grid{0.004, 300, 0.0};
    auto a = simulate(lin, {&x0, 1}, [&](std::size_t) {
        return std::span<const double>(u1, 1);
    }, grid);
    auto b = simulate(lin, {&x0, 1}, [&](std::size_t) {
        return std::span<const double>(u3, 1);
    }, grid);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(b[i] == doctest::Approx(3.0 * a[i]).epsilon(1e-9));

    auto again = simulate(lin, {&x0, 1}, [&](std::size_t) {
        return std::span<const double>(u1, 1);
    }, grid);
    CHECK(a == again);  // bitwise identical
}

TEST_CASE("TimeSeries channel bookkeeping") {
    TimeSeries ts(TimeGrid{0.004, 10, 0.0});
    auto& a = ts.add("omega");
    a.assign(10, 1.0);
    auto& b = ts.add("beta");
    b.assign(10, 2.0);
    // References stay valid after later additions.
    ts.add("thrust").assign(10, 3.0);
    CHECK(a[0] == 1.0);
    CHECK(b[5] == 2.0);
    CHECK(ts.has("thrust"));
    CHECK_NOTHROW(ts.check_lengths());
    ts.at("beta").resize(4);
    CHECK_THROWS_AS(ts.check_lengths(), DataError);
    CHECK_THROWS_AS(ts.at("missing"), DataError);
    CHECK_THROWS_AS(ts.add("omega"), DataError);
}
