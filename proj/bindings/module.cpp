// Python bindings for the identification and control-design toolkit.
// Exposes the model evaluation, the fitting stages, the sensitivity-based
// refinement, and the thrust-controller simulation/tuning.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vpp/config.hpp"
#include "vpp/pipeline.hpp"

namespace py = pybind11;
using namespace vpp;

namespace {

py::dict timeseries_to_dict(const TimeSeries& ts) {
    py::dict d;
    d["dt"] = ts.grid().dt;
    std::vector<double> t(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) t[i] = ts.grid().time(i);
    d["t"] = t;
    for (const auto& name : ts.names()) d[name.c_str()] = ts.at(name);
    return d;
}

}  // namespace

PYBIND11_MODULE(_vppid, m) {
    m.doc() = "Grey-box identification and thrust-control design for "
              "variable-pitch propeller powertrains";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<WienerParams>(m, "WienerParams")
        .def(py::init<>())
        .def_readwrite("tau_omega_1", &WienerParams::tau_omega_1)
        .def_readwrite("tau_omega_2", &WienerParams::tau_omega_2)
        .def_readwrite("tau_beta_1", &WienerParams::tau_beta_1)
        .def_readwrite("tau_beta_2", &WienerParams::tau_beta_2)
        .def_readwrite("c20", &WienerParams::c20)
        .def_readwrite("c11", &WienerParams::c11)
        .def_readwrite("c21", &WienerParams::c21)
        .def_readwrite("c12", &WienerParams::c12)
        .def_readwrite("c30", &WienerParams::c30)
        .def("to_vector", &WienerParams::to_vector)
        .def_static("from_vector", &WienerParams::from_vector);

    py::class_<Normalization>(m, "Normalization")
        .def(py::init<>())
        .def_readwrite("omega_scale", &Normalization::omega_scale)
        .def_readwrite("beta_offset", &Normalization::beta_offset)
        .def_readwrite("beta_span", &Normalization::beta_span)
        .def_readwrite("thrust_scale", &Normalization::thrust_scale);

    m.def("thrust_output", &thrust_output, py::arg("omega_n"), py::arg("beta_n"),
          py::arg("params"), "Static thrust polynomial in normalized units.");
    m.def("second_order_step_response", &second_order_step_response, py::arg("t"),
          py::arg("tau_1"), py::arg("tau_2"),
          "Unit step response of the two-lag unity-DC-gain dynamics.");

    m.def(
        "fit_static_map",
        [](const std::vector<std::array<double, 3>>& samples, double beta_min,
           double beta_max) {
            std::vector<StaticSample> s(samples.size());
            for (std::size_t i = 0; i < samples.size(); ++i)
                s[i] = {samples[i][0], samples[i][1], samples[i][2]};
            const StaticMapFit fit = fit_static_map(s, beta_min, beta_max);
            py::dict d;
            d["coeffs"] = fit.coeffs;
            d["adjusted_r2"] = fit.adjusted_r2;
            return d;
        },
        py::arg("samples"), py::arg("beta_min") = -std::numeric_limits<double>::infinity(),
        py::arg("beta_max") = std::numeric_limits<double>::infinity(),
        "Least-squares thrust-map fit on (omega, beta, thrust) samples.");

    m.def(
        "fit_time_constants",
        [](const std::vector<double>& y, double dt) {
            const TimeConstantFit fit = fit_time_constants(y, dt);
            py::dict d;
            d["tau_1"] = fit.tau_1;
            d["tau_2"] = fit.tau_2;
            d["rms_residual"] = fit.rms_residual;
            d["poor_fit"] = fit.poor_fit;
            return d;
        },
        py::arg("y"), py::arg("dt"),
        "Fits a normalized step response against the two-lag shape.");

    py::class_<NormalizedDataset>(m, "NormalizedDataset")
        .def(py::init([](double dt, std::vector<double> omega_ref,
                         std::vector<double> beta_ref, std::vector<double> thrust) {
                 NormalizedDataset d;
                 d.grid = {dt, omega_ref.size(), 0.0};
                 d.omega_ref = std::move(omega_ref);
                 d.beta_ref = std::move(beta_ref);
                 d.thrust = std::move(thrust);
                 return d;
             }),
             py::arg("dt"), py::arg("omega_ref"), py::arg("beta_ref"), py::arg("thrust"));

    m.def("cost", &cost, py::arg("params"), py::arg("data"),
          "Mean squared thrust mismatch of the simulated model.");
    m.def("gradient", &gradient, py::arg("params"), py::arg("data"),
          "Forward-sensitivity gradient of the cost.");

    m.def(
        "refine",
        [](const WienerParams& p0, const NormalizedDataset& data, double eta_tau,
           double eta_coeff, double stop_threshold, std::size_t max_iters) {
            FineTuneConfig cfg;
            cfg.eta_tau = eta_tau;
            cfg.eta_coeff = eta_coeff;
            cfg.stop_threshold = stop_threshold;
            cfg.max_iters = max_iters;
            const FineTuneResult res = gradient_descent(p0, data, cfg);
            py::dict d;
            d["params"] = res.params;
            d["learning_curve"] = res.curve.cost;
            d["iterations"] = res.iterations;
            d["converged"] = res.converged;
            return d;
        },
        py::arg("params"), py::arg("data"), py::arg("eta_tau") = FineTuneConfig{}.eta_tau,
        py::arg("eta_coeff") = FineTuneConfig{}.eta_coeff,
        py::arg("stop_threshold") = FineTuneConfig{}.stop_threshold,
        py::arg("max_iters") = FineTuneConfig{}.max_iters,
        "Gradient-descent refinement of all nine model parameters.");

    py::class_<PidGains>(m, "PidGains")
        .def(py::init<>())
        .def(py::init([](double kp_w, double ki_w, double kd_w, double kp_b, double ki_b,
                         double kd_b) {
                 return PidGains{kp_w, ki_w, kd_w, kp_b, ki_b, kd_b};
             }),
             py::arg("kp_omega"), py::arg("ki_omega"), py::arg("kd_omega"),
             py::arg("kp_beta"), py::arg("ki_beta"), py::arg("kd_beta"))
        .def_readwrite("kp_omega", &PidGains::kp_omega)
        .def_readwrite("ki_omega", &PidGains::ki_omega)
        .def_readwrite("kd_omega", &PidGains::kd_omega)
        .def_readwrite("kp_beta", &PidGains::kp_beta)
        .def_readwrite("ki_beta", &PidGains::ki_beta)
        .def_readwrite("kd_beta", &PidGains::kd_beta)
        .def("to_vector", &PidGains::to_vector);

    py::enum_<ActuationMode>(m, "ActuationMode")
        .value("combined", ActuationMode::combined)
        .value("rpm_only", ActuationMode::rpm_only);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("sigma_thrust", &RunConfig::sigma_thrust)
        .def_readwrite("dt", &RunConfig::dt)
        .def_readwrite("tau_beta_2_override", &RunConfig::tau_beta_2_override)
        .def("apply", &RunConfig::apply, py::arg("key"), py::arg("value"),
             "Sets one 'section.key' configuration entry from its text value.");

    m.def("load_config", &load_config, py::arg("path"),
          "Parses a configuration file (fails fast on unknown keys).");

    m.def(
        "step_test",
        [](const WienerParams& model, const PidGains& gains, const RunConfig& cfg,
           ActuationMode mode) {
            const ControlRunConfig cc = cfg.control_config(model, mode);
            return timeseries_to_dict(closed_loop_simulate(model, gains, cc, mode));
        },
        py::arg("model"), py::arg("gains"), py::arg("config") = RunConfig{},
        py::arg("mode") = ActuationMode::combined,
        "Closed-loop thrust-step simulation; returns the trajectory channels.");

    m.def(
        "control_cost",
        [](const PidGains& gains, const WienerParams& model, const RunConfig& cfg,
           ActuationMode mode) {
            return control_cost(gains, model, cfg.control_config(model, mode), mode);
        },
        py::arg("gains"), py::arg("model"), py::arg("config") = RunConfig{},
        py::arg("mode") = ActuationMode::combined,
        "Tracking cost of the gains on the configured step profile.");

    m.def(
        "tune_gains",
        [](const WienerParams& model, const RunConfig& cfg, ActuationMode mode) {
            const TuneReport rep =
                tune_gains(model, cfg.control_config(model, mode), mode);
            py::dict d;
            d["gains"] = rep.gains;
            d["cost"] = rep.cost;
            d["n_evals"] = rep.n_evals;
            return d;
        },
        py::arg("model"), py::arg("config") = RunConfig{},
        py::arg("mode") = ActuationMode::combined,
        "Two-stage gain optimization (P/I first, then derivative gains).");

    m.def(
        "generate_openloop_record",
        [](const RunConfig& cfg) { return timeseries_to_dict(generate_openloop_record(cfg)); },
        py::arg("config") = RunConfig{},
        "Synthetic open-loop plant record for model refinement.");

    m.def(
        "generate_static_samples",
        [](const RunConfig& cfg) {
            const auto samples = generate_static_samples(cfg);
            std::vector<std::array<double, 3>> out(samples.size());
            for (std::size_t i = 0; i < samples.size(); ++i)
                out[i] = {samples[i].omega, samples[i].beta, samples[i].thrust};
            return out;
        },
        py::arg("config") = RunConfig{},
        "Steady-state characterization grid (omega RPM, beta deg, thrust N).");
}
