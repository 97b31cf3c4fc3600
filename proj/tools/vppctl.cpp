// Command-line front end for the identification and control-design pipeline.
//
// Stages communicate through files in the output directory: CSV for records
// (schema: t,omega_ref,beta_ref,omega,beta,thrust) and flat JSON for models
// and summaries, so any stage can be re-run or swapped out independently.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "vpp/csv.hpp"
#include "vpp/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace vpp;

namespace {

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

ordered_json model_to_json(const WienerParams& p) {
    return ordered_json{{"tau_omega_1", p.tau_omega_1}, {"tau_omega_2", p.tau_omega_2},
                        {"tau_beta_1", p.tau_beta_1},   {"tau_beta_2", p.tau_beta_2},
                        {"c20", p.c20},                 {"c11", p.c11},
                        {"c21", p.c21},                 {"c12", p.c12},
                        {"c30", p.c30}};
}

WienerParams model_from_json(const ordered_json& j) {
    WienerParams p;
    try {
        p.tau_omega_1 = j.at("tau_omega_1");
        p.tau_omega_2 = j.at("tau_omega_2");
        p.tau_beta_1 = j.at("tau_beta_1");
        p.tau_beta_2 = j.at("tau_beta_2");
        p.c20 = j.at("c20");
        p.c11 = j.at("c11");
        p.c21 = j.at("c21");
        p.c12 = j.at("c12");
        p.c30 = j.at("c30");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    p.validate();
    return p;
}

ordered_json gains_to_json(const PidGains& g) {
    return ordered_json{{"kp_omega", g.kp_omega}, {"ki_omega", g.ki_omega},
                        {"kd_omega", g.kd_omega}, {"kp_beta", g.kp_beta},
                        {"ki_beta", g.ki_beta},   {"kd_beta", g.kd_beta}};
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> noise;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Configuration file (INI style)");
    cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "Random seed (overrides config)");
    cmd->add_option("--noise", opts.noise, "Thrust noise sigma in N (overrides config)");
    cmd->add_option("--override", opts.overrides,
                    "Config override section.key=value (repeatable)");
}

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
    apply_overrides(cfg, opts.overrides);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.noise) cfg.sigma_thrust = *opts.noise;
    return cfg;
}

void cmd_gen_data(const CommonOpts& opts) {
    RunConfig cfg = resolve_config(opts);
    fs::create_directories(fs::path(opts.out_dir) / "steps");

    auto campaign = generate_step_campaign(cfg);
    std::vector<std::vector<double>> index;
    for (const auto& rec : campaign) {
        const fs::path p = fs::path(opts.out_dir) / "steps" / (rec.name + ".csv");
        write_timeseries_csv(p, rec.series);
        index.push_back({rec.omega_channel ? 1.0 : 0.0, rec.start_level, rec.end_level});
    }
    write_table_csv(fs::path(opts.out_dir) / "steps_index.csv",
                    {"omega_channel", "start", "end"}, index);

    TimeSeries openloop = generate_openloop_record(cfg);
    write_timeseries_csv(fs::path(opts.out_dir) / "openloop.csv", openloop);

    auto samples = generate_static_samples(cfg);
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back({s.omega, s.beta, s.thrust});
    write_table_csv(fs::path(opts.out_dir) / "static_grid.csv", {"omega", "beta", "thrust"},
                    rows);

    write_json(fs::path(opts.out_dir) / "gen_data.json",
               ordered_json{{"seed", cfg.seed},
                            {"sigma_thrust", cfg.sigma_thrust},
                            {"n_step_records", campaign.size()},
                            {"n_static_samples", samples.size()},
                            {"openloop_duration", openloop.grid().duration()}});
    std::cout << "wrote " << campaign.size() << " step records, openloop record and "
              << samples.size() << " static samples to " << opts.out_dir << "\n";
}

std::vector<StaticSample> load_static_samples(const fs::path& path) {
    Table t = read_table_csv(path);
    auto w = t.column("omega");
    auto b = t.column("beta");
    auto T = t.column("thrust");
    std::vector<StaticSample> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = {w[i], b[i], T[i]};
    return out;
}

void cmd_static_map(const CommonOpts& opts) {
    RunConfig cfg = resolve_config(opts);
    auto samples = load_static_samples(fs::path(opts.out_dir) / "static_grid.csv");
    StaticMapFit fit = fit_static_map_normalized(samples, cfg);
    write_json(fs::path(opts.out_dir) / "static_map.json",
               ordered_json{{"c20", fit.coeffs[0]},
                            {"c11", fit.coeffs[1]},
                            {"c21", fit.coeffs[2]},
                            {"c12", fit.coeffs[3]},
                            {"c30", fit.coeffs[4]},
                            {"adjusted_r2", fit.adjusted_r2},
                            {"n_samples", samples.size()}});
    std::cout << "static map fitted, adjusted R^2 = " << fit.adjusted_r2 << "\n";
}

void cmd_step_ident(const CommonOpts& opts) {
    RunConfig cfg = resolve_config(opts);
    Table index = read_table_csv(fs::path(opts.out_dir) / "steps_index.csv");
    auto chan = index.column("omega_channel");
    auto start = index.column("start");
    auto end = index.column("end");
    std::vector<StepCampaignRecord> records;
    std::size_t group_pos = 0;
    for (std::size_t i = 0; i < chan.size(); ++i) {
        StepCampaignRecord rec;
        rec.omega_channel = chan[i] != 0.0;
        rec.start_level = start[i];
        rec.end_level = end[i];
        // Record files are named by channel, step direction and a 1-based index
        // within each of the four contiguous series of the campaign.
        const bool same_group = i > 0 && chan[i] == chan[i - 1] &&
                                (end[i] > start[i]) == (end[i - 1] > start[i - 1]);
        group_pos = same_group ? group_pos + 1 : 0;
        rec.name = std::string(rec.omega_channel ? "omega" : "beta") +
                   (rec.end_level > rec.start_level ? "_up_" : "_down_") +
                   std::to_string(group_pos + 1);
        rec.series =
            read_timeseries_csv(fs::path(opts.out_dir) / "steps" / (rec.name + ".csv"));
        records.push_back(std::move(rec));
    }
    StepIdentReport report = identify_time_constants(records, cfg);

    std::vector<std::vector<double>> per_record;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& e = report.experiments[i];
        per_record.push_back({chan[i], start[i], end[i], e.valid ? 1.0 : 0.0,
                              e.fitted.tau_1, e.fitted.tau_2, e.fitted.rms_residual});
    }
    write_table_csv(fs::path(opts.out_dir) / "step_ident_records.csv",
                    {"omega_channel", "start", "end", "valid", "tau_1", "tau_2",
                     "rms_residual"},
                    per_record);
    write_json(fs::path(opts.out_dir) / "step_ident.json",
               ordered_json{{"tau_omega_1", report.tau_omega_1},
                            {"tau_omega_2", report.tau_omega_2},
                            {"tau_beta_1", report.tau_beta_1},
                            {"tau_beta_2", report.tau_beta_2},
                            {"n_valid_omega", report.n_valid_omega},
                            {"n_valid_beta", report.n_valid_beta}});
    std::cout << "time constants: omega (" << report.tau_omega_1 << ", " << report.tau_omega_2
              << ") s, pitch (" << report.tau_beta_1 << ", " << report.tau_beta_2 << ") s\n";
}

WienerParams assemble_initial_model(const fs::path& out_dir) {
    ordered_json sm = read_json(out_dir / "static_map.json");
    ordered_json si = read_json(out_dir / "step_ident.json");
    WienerParams p;
    p.tau_omega_1 = si.at("tau_omega_1");
    p.tau_omega_2 = si.at("tau_omega_2");
    p.tau_beta_1 = si.at("tau_beta_1");
    p.tau_beta_2 = si.at("tau_beta_2");
    p.c20 = sm.at("c20");
    p.c11 = sm.at("c11");
    p.c21 = sm.at("c21");
    p.c12 = sm.at("c12");
    p.c30 = sm.at("c30");
    p.validate();
    return p;
}

void cmd_finetune(const CommonOpts& opts, const std::string& model_path) {
    RunConfig cfg = resolve_config(opts);
    const fs::path out_dir(opts.out_dir);
    WienerParams initial = model_path.empty() ? assemble_initial_model(out_dir)
                                              : model_from_json(read_json(model_path));
    TimeSeries openloop = read_timeseries_csv(out_dir / "openloop.csv");
    FineTuneResult res = finetune_model(initial, openloop, cfg);

    std::vector<std::vector<double>> curve;
    curve.reserve(res.curve.cost.size());
    for (std::size_t i = 0; i < res.curve.cost.size(); ++i)
        curve.push_back({static_cast<double>(i), res.curve.cost[i]});
    write_table_csv(out_dir / "learning_curve.csv", {"iteration", "cost"}, curve);

    ordered_json j = model_to_json(res.params);
    j["cost_initial"] = res.curve.cost.front();
    j["cost_final"] = res.curve.cost.back();
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    write_json(out_dir / "model.json", j);
    std::cout << "cost " << res.curve.cost.front() << " -> " << res.curve.cost.back() << " in "
              << res.iterations << " iterations\n";
}

void cmd_tune_control(const CommonOpts& opts, const std::string& model_path,
                      const std::string& mode_name) {
    RunConfig cfg = resolve_config(opts);
    const fs::path out_dir(opts.out_dir);
    WienerParams model = model_from_json(
        read_json(model_path.empty() ? (out_dir / "model.json").string() : model_path));
    const ActuationMode mode =
        mode_name == "rpm_only" ? ActuationMode::rpm_only : ActuationMode::combined;
    ControlRunConfig cc = cfg.control_config(model, mode);
    TuneReport report = tune_gains(model, cc, mode);
    ordered_json j = gains_to_json(report.gains);
    j["mode"] = mode_name;
    j["cost"] = report.cost;
    j["n_evals"] = report.n_evals;
    write_json(out_dir / ("control_" + mode_name + ".json"), j);

    TimeSeries traj = closed_loop_simulate(model, report.gains, cc, mode);
    write_timeseries_csv(out_dir / ("control_" + mode_name + ".csv"), traj,
                         "# units: s, -, -, -, -, -, -");
    std::cout << mode_name << " cost " << report.cost << " (" << report.n_evals << " evals)\n";
}

void cmd_compare(const CommonOpts& opts, const std::string& model_path) {
    RunConfig cfg = resolve_config(opts);
    const fs::path out_dir(opts.out_dir);
    WienerParams model = model_from_json(
        read_json(model_path.empty() ? (out_dir / "model.json").string() : model_path));
    ControlComparison cmp = tune_both_modes(model, cfg);
    ordered_json j;
    for (const auto& [prefix, rep] :
         {std::pair{"combined_", &cmp.combined}, std::pair{"rpm_only_", &cmp.rpm_only}}) {
        j[prefix + std::string("cost")] = rep->cost;
        for (auto& [k, v] : gains_to_json(rep->gains).items()) j[prefix + k] = v;
    }
    j["combined_no_worse"] = cmp.combined.cost <= cmp.rpm_only.cost;
    write_json(out_dir / "control_compare.json", j);
    std::cout << "combined cost " << cmp.combined.cost << ", speed-only cost "
              << cmp.rpm_only.cost << "\n";
}

void cmd_simulate(const CommonOpts& opts, const std::string& model_path,
                  const std::string& refs_path) {
    RunConfig cfg = resolve_config(opts);
    const fs::path out_dir(opts.out_dir);
    WienerParams model = model_from_json(
        read_json(model_path.empty() ? (out_dir / "model.json").string() : model_path));
    TimeSeries refs = read_timeseries_csv(
        refs_path.empty() ? (out_dir / "openloop.csv").string() : refs_path);
    TimeSeries sim = simulate_model(model, refs, cfg.norm);
    fs::create_directories(out_dir);
    write_timeseries_csv(out_dir / "simulated.csv", sim);
    std::cout << "wrote " << (out_dir / "simulated.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grey-box identification and thrust-control design for variable-pitch "
                 "propeller powertrains"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string model_path, refs_path, mode_name = "combined";

    add_common(app.add_subcommand("gen-data", "Generate the synthetic test-bench records"),
               opts);
    add_common(app.add_subcommand("static-map", "Fit the static thrust polynomial"), opts);
    add_common(app.add_subcommand("step-ident", "Fit the loop time constants from steps"),
               opts);
    auto* ft = app.add_subcommand("finetune", "Refine the model on the open-loop record");
    add_common(ft, opts);
    ft->add_option("--model", model_path, "Initial model JSON (default: assembled from fits)");
    auto* tc = app.add_subcommand("tune-control", "Optimize the thrust-controller gains");
    add_common(tc, opts);
    tc->add_option("--model", model_path, "Model JSON (default: <out>/model.json)");
    tc->add_option("--mode", mode_name, "Actuation mode: combined or rpm_only")
        ->check(CLI::IsMember({"combined", "rpm_only"}));
    auto* cp = app.add_subcommand("compare", "Tune and compare both actuation modes");
    add_common(cp, opts);
    cp->add_option("--model", model_path, "Model JSON (default: <out>/model.json)");
    auto* sim = app.add_subcommand("simulate", "Run the model through a reference record");
    add_common(sim, opts);
    sim->add_option("--model", model_path, "Model JSON (default: <out>/model.json)");
    sim->add_option("--refs", refs_path, "Reference CSV (default: <out>/openloop.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.get_subcommand("gen-data")->parsed()) cmd_gen_data(opts);
        if (app.get_subcommand("static-map")->parsed()) cmd_static_map(opts);
        if (app.get_subcommand("step-ident")->parsed()) cmd_step_ident(opts);
        if (ft->parsed()) cmd_finetune(opts, model_path);
        if (tc->parsed()) cmd_tune_control(opts, model_path, mode_name);
        if (cp->parsed()) cmd_compare(opts, model_path);
        if (sim->parsed()) cmd_simulate(opts, model_path, refs_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const InvalidParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
