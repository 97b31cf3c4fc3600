#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vpp/config.hpp"
#include "vpp/control.hpp"
#include "vpp/finetune.hpp"
#include "vpp/ident.hpp"

namespace vpp {

/// Stage wrappers shared by the command-line tool and the Python bindings.
/// Each stage consumes plain data and returns plain results; file layout and
/// summary serialization live in the callers.

struct StepCampaignRecord {
    TimeSeries series;
    bool omega_channel = true;
    double start_level = 0.0;
    double end_level = 0.0;
    std::string name;  // e.g. "omega_up_3"
};

/// Full step campaign: n_levels up and n_levels down per channel, amplitudes
/// evenly spaced between the configured end bounds.
std::vector<StepCampaignRecord> generate_step_campaign(const RunConfig& cfg);

/// Open-loop record for refinement: three equal parts (speed steps at fixed
/// pitch, pitch steps at fixed speed, simultaneous steps), levels drawn
/// uniformly from the operating box with the run seed.
TimeSeries generate_openloop_record(const RunConfig& cfg);

/// Static characterization samples over the configured grid. Steady states
/// are exact; measurement noise enters as the standard error of an
/// n_samples-point average.
std::vector<StaticSample> generate_static_samples(const RunConfig& cfg);

/// Normalizes samples and fits the five-coefficient thrust polynomial over
/// the truncated pitch window.
StaticMapFit fit_static_map_normalized(const std::vector<StaticSample>& samples,
                                       const RunConfig& cfg);

struct StepIdentReport {
    std::vector<StepExperiment> experiments;  // same order as the campaign
    double tau_omega_1 = 0.0;
    double tau_omega_2 = 0.0;
    double tau_beta_1 = 0.0;
    double tau_beta_2 = 0.0;
    std::size_t n_valid_omega = 0;
    std::size_t n_valid_beta = 0;
};

/// Fits every record of the campaign and averages the time constants per
/// channel over the valid experiments.
StepIdentReport identify_time_constants(const std::vector<StepCampaignRecord>& records,
                                        const RunConfig& cfg);

/// Refines the model on the open-loop record; applies the tau_beta_2
/// override (freeze at a fixed value) when configured.
FineTuneResult finetune_model(const WienerParams& initial, const TimeSeries& openloop,
                              const RunConfig& cfg);

struct ControlComparison {
    TuneReport combined;
    TuneReport rpm_only;
};

/// Tunes both actuation modes on the same model and setpoint profile. The
/// combined search is re-seeded from the speed-only optimum so adding the
/// pitch loop can only keep or lower the cost.
ControlComparison tune_both_modes(const WienerParams& model, const RunConfig& cfg);

/// Simulates the identified model through the reference channels of a
/// record and returns the trajectory in physical units (channels: omega_ref,
/// beta_ref, omega, beta, thrust).
TimeSeries simulate_model(const WienerParams& model, const TimeSeries& refs,
                          const Normalization& norm);

}  // namespace vpp
