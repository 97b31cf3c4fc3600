#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vpp/errors.hpp"

namespace vpp {

/// Uniform sampling grid: n_steps samples at t0, t0+dt, ..., t0+(n_steps-1)dt.
struct TimeGrid {
    double dt = 0.004;  // 250 Hz default acquisition rate
    std::size_t n_steps = 1;
    double t0 = 0.0;

    void validate() const {
        if (dt <= 0.0) throw InvalidParameterError("grid dt must be positive");
        if (n_steps < 1) throw InvalidParameterError("grid needs at least one step");
    }

    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double duration() const { return dt * static_cast<double>(n_steps - 1); }
};

/// Uniformly sampled multi-channel record. Every channel has n_steps samples;
/// the time channel "t" is implicit in the grid but also stored on export.
class TimeSeries {
  public:
    TimeSeries() = default;
    explicit TimeSeries(TimeGrid grid) : grid_(grid) { grid_.validate(); }

    const TimeGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.n_steps; }

    /// References returned by add()/at() stay valid when more channels are
    /// added (columns live in a deque).
    bool has(const std::string& name) const;
    std::vector<double>& add(const std::string& name);
    std::vector<double>& at(const std::string& name);
    const std::vector<double>& at(const std::string& name) const;
    const std::vector<std::string>& names() const { return names_; }

    /// Throws DataError unless every channel has exactly n_steps samples.
    void check_lengths() const;

  private:
    TimeGrid grid_;
    std::vector<std::string> names_;
    std::deque<std::vector<double>> cols_;
};

/// Right-hand side f(t, x, u) -> dx/dt. Must be side-effect free.
using RateFn = std::function<void(double t, std::span<const double> x,
                                  std::span<const double> u, std::span<double> rate)>;

/// One classical Runge-Kutta step with the input held constant (zero-order
/// hold). Throws NumericError if the rate evaluates to a non-finite value.
void rk4_step(const RateFn& f, double t, std::span<const double> x,
              std::span<const double> u, double dt, std::span<double> x_next);

/// Per-step input lookup for simulate(); step index is the grid sample index.
using InputFn = std::function<std::span<const double>(std::size_t step)>;

/// Integrates x through the grid, returning all states at grid samples in
/// row-major order (n_steps rows of x.size() columns). Inputs are held
/// constant across each step. Deterministic: identical inputs give
/// bit-identical output.
std::vector<double> simulate(const RateFn& f, std::span<const double> x0,
                             const InputFn& input, const TimeGrid& grid,
                             std::size_t substeps = 1);

}  // namespace vpp
