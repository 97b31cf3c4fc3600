#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "vpp/control.hpp"
#include "vpp/finetune.hpp"
#include "vpp/ident.hpp"
#include "vpp/plant.hpp"

namespace vpp {

/// Step campaign definition: five amplitudes per channel and direction, end
/// levels evenly spaced between end_min and end_max.
struct ProtocolConfig {
    double omega_up_start = 2000.0;  // RPM
    double omega_up_end_min = 2500.0;
    double omega_up_end_max = 6000.0;
    double omega_down_start = 6000.0;
    double omega_down_end_min = 5500.0;
    double omega_down_end_max = 2000.0;
    double beta_up_start = -10.0;  // deg
    double beta_up_end_min = -6.0;
    double beta_up_end_max = 10.0;
    double beta_down_start = 10.0;
    double beta_down_end_min = 6.0;
    double beta_down_end_max = -10.0;
    double n_levels = 5;
    double pre_step = 5.0;   // s
    double post_step = 5.0;  // s
    double omega_hold_beta = 2.5;     // deg held during RPM steps
    double beta_hold_omega = 4000.0;  // RPM held during pitch steps
};

/// Open-loop record for fine-tuning: three equal parts (RPM only, pitch
/// only, both), each a sequence of held levels.
struct OpenLoopConfig {
    double part_duration = 10.0;   // s
    double segment_length = 2.0;   // s
};

/// Everything a pipeline run needs; parsed fully before any stage runs.
struct RunConfig {
    PlantParams plant;
    AeroMaps aero;
    LowLevelGains gains{1.7e-6, 6.9e-4, 0.05, 0.01};  // desk-rig low-level loops
    Normalization norm;
    StaticGridSpec static_grid;
    ProtocolConfig protocol;
    OpenLoopConfig openloop;
    FineTuneConfig finetune;
    double sigma_thrust = 0.05;  // N
    double dead_band_deg = 0.0;
    double dt = 0.004;  // s, acquisition step
    std::uint64_t seed = 1;
    // Fine-tune override: set to freeze tau_beta_2 at this value (NaN: off).
    double tau_beta_2_override = std::numeric_limits<double>::quiet_NaN();
    // Control stage.
    double control_alpha = 1e-4;
    double control_t_opt = 10.0;
    double control_t_filter = 0.02;
    double control_set_low = 0.1;
    double control_set_high = 0.8;
    double control_set_mid = 0.3;
    // Normalized pitch operating point for combined actuation. Starting from
    // maximum pitch puts both modes at the identical pre-step steady state,
    // with the pitch loop free to act downward.
    double control_beta_bias = 1.0;

    /// Applies "section.key = value" pairs; unknown keys are errors.
    void apply(const std::string& key, const std::string& value);

    OperatingBox box() const;
    ControlRunConfig control_config(const WienerParams& model, ActuationMode mode) const;
};

/// Parses the key/value config file (INI sections, '#' comments). Fail-fast:
/// any unknown key or malformed line throws ConfigError with file/line.
RunConfig load_config(const std::filesystem::path& path);

/// Applies repeatable "section.key=value" override strings.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

/// Solves h(w, beta_n) = thrust_n for the normalized speed reference on
/// [omega_min, 1] by bisection (used for the controller feedforward point).
/// Targets outside the reachable range return the nearest range end.
double solve_omega_for_thrust(const WienerParams& model, double beta_n, double thrust_n,
                              double omega_min);

}  // namespace vpp
