#include "vpp/ode.hpp"

#include <algorithm>
#include <cmath>

namespace vpp {

bool TimeSeries::has(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::vector<double>& TimeSeries::add(const std::string& name) {
    if (has(name)) throw DataError("duplicate channel '" + name + "'");
    names_.push_back(name);
    cols_.emplace_back();
    cols_.back().reserve(grid_.n_steps);
    return cols_.back();
}

std::vector<double>& TimeSeries::at(const std::string& name) {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return cols_[i];
    throw DataError("missing channel '" + name + "'");
}

const std::vector<double>& TimeSeries::at(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return cols_[i];
    throw DataError("missing channel '" + name + "'");
}

void TimeSeries::check_lengths() const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (cols_[i].size() != grid_.n_steps)
            throw DataError("channel '" + names_[i] + "' has " +
                            std::to_string(cols_[i].size()) + " samples, expected " +
                            std::to_string(grid_.n_steps));
}

namespace {

void check_finite(std::span<const double> rate, double t) {
    for (double r : rate)
        if (!std::isfinite(r))
            throw NumericError("non-finite state rate at t = " + std::to_string(t));
}

}  // namespace

void rk4_step(const RateFn& f, double t, std::span<const double> x,
              std::span<const double> u, double dt, std::span<double> x_next) {
    if (dt <= 0.0) throw InvalidParameterError("rk4_step requires dt > 0");
    const std::size_t n = x.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    f(t, x, u, k1);
    check_finite(k1, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    f(t + 0.5 * dt, tmp, u, k2);
    check_finite(k2, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    f(t + 0.5 * dt, tmp, u, k3);
    check_finite(k3, t);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    f(t + dt, tmp, u, k4);
    check_finite(k4, t);
    for (std::size_t i = 0; i < n; ++i)
        x_next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

std::vector<double> simulate(const RateFn& f, std::span<const double> x0,
                             const InputFn& input, const TimeGrid& grid,
                             std::size_t substeps) {
    grid.validate();
    if (substeps < 1) throw InvalidParameterError("substeps must be >= 1");
    const std::size_t n = x0.size();
    std::vector<double> out(grid.n_steps * n);
    std::vector<double> x(x0.begin(), x0.end());
    std::copy(x.begin(), x.end(), out.begin());

    const double h = grid.dt / static_cast<double>(substeps);
    for (std::size_t i = 0; i + 1 < grid.n_steps; ++i) {
        const auto u = input(i);
        try {
            for (std::size_t s = 0; s < substeps; ++s) {
                const double t = grid.time(i) + h * static_cast<double>(s);
                rk4_step(f, t, x, u, h, x);
            }
        } catch (const NumericError& e) {
            throw NumericError("integration failed at step " + std::to_string(i) + " (t = " +
                               std::to_string(grid.time(i)) + "): " + e.what());
        }
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    }
    return out;
}

}  // namespace vpp
