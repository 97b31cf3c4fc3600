#include "vpp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include "vpp/errors.hpp"

namespace vpp {
namespace {

// std::uint64_t and std::size_t coincide on this platform; one integer
// alternative covers both.
using Slot = std::variant<double*, std::size_t*>;

struct Registry {
    std::vector<std::pair<std::string, Slot>> entries;

    void add(const std::string& key, Slot slot) { entries.emplace_back(key, slot); }

    Slot* find(const std::string& key) {
        for (auto& [k, s] : entries)
            if (k == key) return &s;
        return nullptr;
    }
};

Registry make_registry(RunConfig& c) {
    Registry r;
    auto& p = c.plant;
    r.add("plant.rho", &p.rho);
    r.add("plant.R", &p.R);
    r.add("plant.tau_lambda", &p.tau_lambda);
    r.add("plant.J", &p.J);
    r.add("plant.k_Q", &p.k_Q);
    r.add("plant.k_omega", &p.k_omega);
    r.add("plant.L_m", &p.L_m);
    r.add("plant.R_m", &p.R_m);
    r.add("plant.V_in", &p.V_in);
    r.add("plant.k_i", &p.k_i);
    r.add("plant.J_a", &p.J_a);
    r.add("plant.D_a", &p.D_a);
    r.add("plant.k_a", &p.k_a);
    r.add("plant.L_a", &p.L_a);
    r.add("plant.R_a", &p.R_a);
    r.add("plant.k_ia", &p.k_ia);
    r.add("plant.V_in_actuator", &p.V_in_actuator);

    auto& a = c.aero;
    r.add("aero.ct0", &a.ct0);
    r.add("aero.ct_beta", &a.ct_beta);
    r.add("aero.ct_beta2", &a.ct_beta2);
    r.add("aero.ct_lambda", &a.ct_lambda);
    r.add("aero.cq0", &a.cq0);
    r.add("aero.cq_beta", &a.cq_beta);
    r.add("aero.cq_lambda", &a.cq_lambda);
    r.add("aero.lqs0", &a.lqs0);
    r.add("aero.lqs_beta", &a.lqs_beta);

    r.add("gains.pi_kp", &c.gains.pi_kp);
    r.add("gains.pi_ki", &c.gains.pi_ki);
    r.add("gains.pd_kp", &c.gains.pd_kp);
    r.add("gains.pd_kd", &c.gains.pd_kd);

    r.add("normalization.omega_scale", &c.norm.omega_scale);
    r.add("normalization.beta_offset", &c.norm.beta_offset);
    r.add("normalization.beta_span", &c.norm.beta_span);
    r.add("normalization.thrust_scale", &c.norm.thrust_scale);

    auto& s = c.static_grid;
    r.add("static.omega_min", &s.omega_min);
    r.add("static.omega_max", &s.omega_max);
    r.add("static.beta_min", &s.beta_min);
    r.add("static.beta_max", &s.beta_max);
    r.add("static.n_omega", &s.n_omega);
    r.add("static.n_beta", &s.n_beta);
    r.add("static.settle_time", &s.settle_time);
    r.add("static.sample_rate", &s.sample_rate);
    r.add("static.n_samples", &s.n_samples);
    r.add("static.fit_beta_min", &s.fit_beta_min);
    r.add("static.fit_beta_max", &s.fit_beta_max);

    auto& pr = c.protocol;
    r.add("protocol.omega_up_start", &pr.omega_up_start);
    r.add("protocol.omega_up_end_min", &pr.omega_up_end_min);
    r.add("protocol.omega_up_end_max", &pr.omega_up_end_max);
    r.add("protocol.omega_down_start", &pr.omega_down_start);
    r.add("protocol.omega_down_end_min", &pr.omega_down_end_min);
    r.add("protocol.omega_down_end_max", &pr.omega_down_end_max);
    r.add("protocol.beta_up_start", &pr.beta_up_start);
    r.add("protocol.beta_up_end_min", &pr.beta_up_end_min);
    r.add("protocol.beta_up_end_max", &pr.beta_up_end_max);
    r.add("protocol.beta_down_start", &pr.beta_down_start);
    r.add("protocol.beta_down_end_min", &pr.beta_down_end_min);
    r.add("protocol.beta_down_end_max", &pr.beta_down_end_max);
    r.add("protocol.n_levels", &pr.n_levels);
    r.add("protocol.pre_step", &pr.pre_step);
    r.add("protocol.post_step", &pr.post_step);
    r.add("protocol.omega_hold_beta", &pr.omega_hold_beta);
    r.add("protocol.beta_hold_omega", &pr.beta_hold_omega);

    r.add("openloop.part_duration", &c.openloop.part_duration);
    r.add("openloop.segment_length", &c.openloop.segment_length);

    r.add("noise.sigma_thrust", &c.sigma_thrust);
    r.add("noise.dead_band_deg", &c.dead_band_deg);

    r.add("run.dt", &c.dt);
    r.add("run.seed", &c.seed);

    auto& f = c.finetune;
    r.add("finetune.eta_tau", &f.eta_tau);
    r.add("finetune.eta_coeff", &f.eta_coeff);
    r.add("finetune.stop_threshold", &f.stop_threshold);
    r.add("finetune.max_iters", &f.max_iters);
    r.add("finetune.tau_min", &f.tau_min);
    r.add("finetune.tau_max", &f.tau_max);
    r.add("finetune.max_halvings", &f.max_halvings);
    r.add("finetune.tau_beta_2_override", &c.tau_beta_2_override);

    r.add("control.alpha", &c.control_alpha);
    r.add("control.t_opt", &c.control_t_opt);
    r.add("control.t_filter", &c.control_t_filter);
    r.add("control.set_low", &c.control_set_low);
    r.add("control.set_high", &c.control_set_high);
    r.add("control.set_mid", &c.control_set_mid);
    r.add("control.beta_bias", &c.control_beta_bias);
    return r;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void assign(Slot& slot, const std::string& key, const std::string& value) {
    const std::string text = trim(value);
    auto fail = [&] {
        throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
    };
    std::visit(
        [&](auto* target) {
            using T = std::remove_pointer_t<decltype(target)>;
            if constexpr (std::is_same_v<T, double>) {
                try {
                    std::size_t used = 0;
                    double v = std::stod(text, &used);
                    if (used != text.size()) fail();
                    *target = v;
                } catch (const std::logic_error&) {
                    fail();
                }
            } else {
                T v{};
                auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
                if (ec != std::errc{} || ptr != text.data() + text.size()) fail();
                *target = v;
            }
        },
        slot);
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    Registry reg = make_registry(*this);
    Slot* slot = reg.find(key);
    if (!slot) throw ConfigError("unknown configuration key '" + key + "'");
    assign(*slot, key, value);
}

OperatingBox RunConfig::box() const {
    return {static_grid.omega_min, static_grid.omega_max, static_grid.beta_min,
            static_grid.beta_max};
}

ControlRunConfig RunConfig::control_config(const WienerParams& model, ActuationMode mode) const {
    ControlRunConfig cc;
    cc.t_opt = control_t_opt;
    cc.alpha = control_alpha;
    cc.dt = dt;
    cc.t_filter = control_t_filter;
    cc.setpoint = ControlRunConfig::default_profile(control_t_opt, control_set_low,
                                                    control_set_high, control_set_mid);
    // Fixed-pitch comparison runs pin the blades at maximum pitch.
    cc.bias_beta = mode == ActuationMode::rpm_only ? 1.0 : control_beta_bias;
    cc.bias_omega =
        solve_omega_for_thrust(model, cc.bias_beta, control_set_low, cc.omega_ref_min);
    cc.validate();
    return cc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    RunConfig cfg;
    Registry reg = make_registry(cfg);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto at = [&] { return path.string() + ":" + std::to_string(line_no); };
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        // Trailing comments after a value are allowed.
        if (auto hash = s.find('#'); hash != std::string::npos) s = trim(s.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(at() + ": malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError(at() + ": empty section name");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(at() + ": expected 'key = value', got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        if (key.empty()) throw ConfigError(at() + ": empty key");
        if (section.empty())
            throw ConfigError(at() + ": key '" + key + "' outside any section");
        std::string full = section + "." + key;
        Slot* slot = reg.find(full);
        if (!slot) throw ConfigError(at() + ": unknown configuration key '" + full + "'");
        try {
            assign(*slot, full, s.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(at() + ": " + e.what());
        }
    }
    cfg.plant.validate();
    cfg.gains.validate();
    cfg.norm.validate();
    cfg.static_grid.validate();
    cfg.finetune.validate();
    return cfg;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must be 'section.key=value', got '" + item + "'");
        cfg.apply(trim(item.substr(0, eq)), item.substr(eq + 1));
    }
}

double solve_omega_for_thrust(const WienerParams& model, double beta_n, double thrust_n,
                              double omega_min) {
    auto f = [&](double w) { return thrust_output(w, beta_n, model) - thrust_n; };
    double lo = omega_min;
    double hi = 1.0;
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    // Best effort at the actuator limits when the target is out of range.
    if (flo > 0.0 && fhi > 0.0) return lo;
    if (flo < 0.0 && fhi < 0.0) return hi;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || hi - lo < 1e-14) return mid;
        if (flo * fm <= 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace vpp
