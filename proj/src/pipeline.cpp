#include "vpp/pipeline.hpp"

#include <cmath>
#include <random>

#include "vpp/errors.hpp"

namespace vpp {
namespace {

double level_at(double end_min, double end_max, std::size_t k, std::size_t n) {
    if (n == 1) return end_max;
    return end_min + (end_max - end_min) * static_cast<double>(k) / static_cast<double>(n - 1);
}

}  // namespace

std::vector<StepCampaignRecord> generate_step_campaign(const RunConfig& cfg) {
    const auto& pr = cfg.protocol;
    const auto n = static_cast<std::size_t>(std::lround(pr.n_levels));
    if (n < 1) throw ConfigError("protocol.n_levels must be at least 1");
    std::vector<StepCampaignRecord> out;
    out.reserve(4 * n);
    struct Series {
        bool omega_channel;
        double start, end_min, end_max;
        const char* tag;
    };
    const Series series[] = {
        {true, pr.omega_up_start, pr.omega_up_end_min, pr.omega_up_end_max, "omega_up"},
        {true, pr.omega_down_start, pr.omega_down_end_min, pr.omega_down_end_max, "omega_down"},
        {false, pr.beta_up_start, pr.beta_up_end_min, pr.beta_up_end_max, "beta_up"},
        {false, pr.beta_down_start, pr.beta_down_end_min, pr.beta_down_end_max, "beta_down"},
    };
    std::size_t index = 0;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < n; ++k, ++index) {
            StepRecordSpec spec;
            spec.omega_channel = s.omega_channel;
            spec.start_level = s.start;
            spec.end_level = level_at(s.end_min, s.end_max, k, n);
            spec.hold_other = s.omega_channel ? pr.omega_hold_beta : pr.beta_hold_omega;
            spec.pre_step = pr.pre_step;
            spec.post_step = pr.post_step;
            SimOptions opt{cfg.sigma_thrust, cfg.seed + index, cfg.dead_band_deg};
            StepCampaignRecord rec;
            rec.series = generate_step_record(spec, cfg.dt, cfg.plant, cfg.aero, cfg.gains, opt,
                                              cfg.box());
            rec.omega_channel = s.omega_channel;
            rec.start_level = spec.start_level;
            rec.end_level = spec.end_level;
            rec.name = std::string(s.tag) + "_" + std::to_string(k + 1);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

TimeSeries generate_openloop_record(const RunConfig& cfg) {
    const auto box = cfg.box();
    const double part = cfg.openloop.part_duration;
    const double seg = cfg.openloop.segment_length;
    if (part <= 0.0 || seg <= 0.0 || seg > part)
        throw ConfigError("openloop durations must satisfy 0 < segment_length <= part_duration");
    TimeGrid grid{cfg.dt, static_cast<std::size_t>(std::lround(3.0 * part / cfg.dt)) + 1, 0.0};

    std::mt19937_64 rng(cfg.seed + 1000);
    std::uniform_real_distribution<double> omega_draw(box.omega_min_rpm, box.omega_max_rpm);
    std::uniform_real_distribution<double> beta_draw(box.beta_min_deg, box.beta_max_deg);

    RefSchedule refs;
    refs.omega_ref_rpm.resize(grid.n_steps);
    refs.beta_ref_deg.resize(grid.n_steps);
    const auto n_seg = static_cast<std::size_t>(std::lround(part / seg));
    // Draw every level up front so the schedule depends only on the seed.
    std::vector<double> w1(n_seg), b2(n_seg), w3(n_seg), b3(n_seg);
    for (auto& v : w1) v = omega_draw(rng);
    for (auto& v : b2) v = beta_draw(rng);
    for (auto& v : w3) v = omega_draw(rng);
    for (auto& v : b3) v = beta_draw(rng);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.time(i);
        const int part_idx = std::min(2, static_cast<int>(t / part));
        const double t_in = t - part_idx * part;
        const std::size_t k = std::min(n_seg - 1, static_cast<std::size_t>(t_in / seg));
        switch (part_idx) {
            case 0:
                refs.omega_ref_rpm[i] = w1[k];
                refs.beta_ref_deg[i] = cfg.protocol.omega_hold_beta;
                break;
            case 1:
                refs.omega_ref_rpm[i] = cfg.protocol.beta_hold_omega;
                refs.beta_ref_deg[i] = b2[k];
                break;
            default:
                refs.omega_ref_rpm[i] = w3[k];
                refs.beta_ref_deg[i] = b3[k];
                break;
        }
    }
    SimOptions opt{cfg.sigma_thrust, cfg.seed + 2000, cfg.dead_band_deg};
    return simulate_closed_loop_plant(refs, grid, cfg.plant, cfg.aero, cfg.gains, opt, box);
}

std::vector<StaticSample> generate_static_samples(const RunConfig& cfg) {
    const auto& s = cfg.static_grid;
    s.validate();
    std::mt19937_64 rng(cfg.seed + 3000);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Averaging n_samples noisy readings leaves the standard error on the mean.
    const double sem = cfg.sigma_thrust / std::sqrt(static_cast<double>(s.n_samples));
    std::vector<StaticSample> out;
    out.reserve(s.n_omega * s.n_beta);
    constexpr double kRadToRpm = 60.0 / (2.0 * M_PI);
    constexpr double kRadToDeg = 180.0 / M_PI;
    for (std::size_t i = 0; i < s.n_omega; ++i) {
        const double w = level_at(s.omega_min, s.omega_max, i, s.n_omega);
        for (std::size_t j = 0; j < s.n_beta; ++j) {
            const double b = level_at(s.beta_min, s.beta_max, j, s.n_beta);
            PlantState st =
                steady_state(w / kRadToRpm, b / kRadToDeg, cfg.plant, cfg.aero, cfg.gains);
            const double thrust = thrust_from_state(st, cfg.plant, cfg.aero) + sem * gauss(rng);
            out.push_back({w, b, thrust});
        }
    }
    return out;
}

StaticMapFit fit_static_map_normalized(const std::vector<StaticSample>& samples,
                                       const RunConfig& cfg) {
    std::vector<StaticSample> normalized;
    normalized.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.beta < cfg.static_grid.fit_beta_min || s.beta > cfg.static_grid.fit_beta_max)
            continue;
        normalized.push_back({cfg.norm.omega_to_n(s.omega), cfg.norm.beta_to_n(s.beta),
                              cfg.norm.thrust_to_n(s.thrust)});
    }
    return fit_static_map(normalized);
}

StepIdentReport identify_time_constants(const std::vector<StepCampaignRecord>& records,
                                        const RunConfig& cfg) {
    StepIdentReport report;
    std::vector<StepExperiment> omega_exp, beta_exp;
    for (const auto& rec : records) {
        StepExperiment exp = analyze_step_record(rec.series, cfg.protocol.pre_step);
        if (rec.omega_channel)
            omega_exp.push_back(exp);
        else
            beta_exp.push_back(exp);
        report.experiments.push_back(std::move(exp));
    }
    auto [tw1, tw2] = average_time_constants(omega_exp);
    auto [tb1, tb2] = average_time_constants(beta_exp);
    report.tau_omega_1 = tw1;
    report.tau_omega_2 = tw2;
    report.tau_beta_1 = tb1;
    report.tau_beta_2 = tb2;
    for (const auto& e : omega_exp) report.n_valid_omega += e.valid ? 1 : 0;
    for (const auto& e : beta_exp) report.n_valid_beta += e.valid ? 1 : 0;
    return report;
}

FineTuneResult finetune_model(const WienerParams& initial, const TimeSeries& openloop,
                              const RunConfig& cfg) {
    NormalizedDataset data = normalize_dataset(openloop, cfg.norm);
    FineTuneConfig ft = cfg.finetune;
    WienerParams start = initial;
    if (std::isfinite(cfg.tau_beta_2_override)) {
        start.tau_beta_2 = cfg.tau_beta_2_override;
        ft.frozen[3] = true;
    }
    return gradient_descent(start, data, ft);
}

ControlComparison tune_both_modes(const WienerParams& model, const RunConfig& cfg) {
    ControlComparison cmp;
    cmp.rpm_only = tune_gains(model, cfg.control_config(model, ActuationMode::rpm_only),
                              ActuationMode::rpm_only);
    cmp.combined = tune_gains(model, cfg.control_config(model, ActuationMode::combined),
                              ActuationMode::combined);
    return cmp;
}

TimeSeries simulate_model(const WienerParams& model, const TimeSeries& refs,
                          const Normalization& norm) {
    NormalizedDataset data;
    data.grid = refs.grid();
    const auto& wr = refs.at("omega_ref");
    const auto& br = refs.at("beta_ref");
    data.omega_ref.resize(wr.size());
    data.beta_ref.resize(br.size());
    for (std::size_t i = 0; i < wr.size(); ++i) {
        data.omega_ref[i] = norm.omega_to_n(wr[i]);
        data.beta_ref[i] = norm.beta_to_n(br[i]);
    }

    WienerState x{data.omega_ref.front(), data.beta_ref.front(), data.omega_ref.front(),
                  data.beta_ref.front()};
    TimeSeries out(refs.grid());
    auto& c_wr = out.add("omega_ref");
    auto& c_br = out.add("beta_ref");
    auto& c_w = out.add("omega");
    auto& c_b = out.add("beta");
    auto& c_T = out.add("thrust");
    RateFn f = [&model](double, std::span<const double> xs, std::span<const double> u,
                        std::span<double> rate) {
        WienerState st{xs[0], xs[1], xs[2], xs[3]};
        WienerState d = wiener_derivative(st, {u[0], u[1]}, model);
        auto dv = d.to_vector();
        std::copy(dv.begin(), dv.end(), rate.begin());
    };
    std::array<double, 4> xv = x.to_vector();
    for (std::size_t i = 0; i < refs.size(); ++i) {
        c_wr.push_back(wr[i]);
        c_br.push_back(br[i]);
        c_w.push_back(norm.omega_from_n(xv[0]));
        c_b.push_back(norm.beta_from_n(xv[1]));
        c_T.push_back(norm.thrust_from_n(thrust_output(xv[0], xv[1], model)));
        if (i + 1 < refs.size()) {
            const std::array<double, 2> u{data.omega_ref[i], data.beta_ref[i]};
            std::array<double, 4> next{};
            rk4_step(f, refs.grid().time(i), xv, u, refs.grid().dt, next);
            xv = next;
        }
    }
    out.check_lengths();
    return out;
}

}  // namespace vpp
