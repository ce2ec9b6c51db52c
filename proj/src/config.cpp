#include "cpk/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

namespace cpk {

using nlohmann::json;

namespace {

json defaults() {
    const DriveSettings d;
    const AnalysisSettings a;
    const PathEfficiency p;
    return json{
        {"emitter",
         {{"gamma_total_mhz", 11.49},
          {"branching", {0.9347, 0.00661, 0.0587}},
          {"b_field_gauss", 4.23},
          {"mu_b_mhz_per_gauss", kBohrMagnetonMHzPerGauss}}},
        {"cavity",
         {{"length_mm", 19.906},
          {"mirror_roc_mm", 9.984},
          {"wavelength_nm", 854.0},
          {"t1_ppm", 2.9},
          {"t2_ppm", 90.0},
          {"scatter_absorb_ppm", 23.1},
          {"speed_of_light_m_s", kSpeedOfLight}}},
        {"drive",
         {{"rabi_mhz", d.rabi_mhz},
          {"rabi2_mhz", d.rabi2_mhz},
          {"detuning_mhz", d.detuning_mhz},
          {"duration_us", d.duration_us},
          {"phase_rad", d.phase_rad},
          {"jitter_khz", d.jitter_khz},
          {"sample_dt_us", d.sample_dt_us},
          {"n_max", d.n_max},
          {"period_slices", d.period_slices},
          {"period_samples", d.period_samples},
          {"light_shift_compensation", d.light_shift_compensation},
          {"estimate_reexcitation", d.estimate_reexcitation},
          {"method", d.method}}},
        {"path_efficiency",
         {{"p_el", p.p_el}, {"p_el_err", p.p_el_err}, {"p_fc", p.p_fc}, {"p_fc_err", p.p_fc_err},
          {"p_det", p.p_det}, {"p_det_err", p.p_det_err}}},
        {"analysis",
         {{"bin_us", a.bin_us},
          {"background_window_us", a.background_window_us},
          {"background_rate_per_s", a.background_rate_per_s},
          {"signal_per_attempt", a.signal_per_attempt},
          {"bootstrap_m", a.bootstrap_m},
          {"n_slots", a.n_slots},
          {"pulse_us", a.pulse_us},
          {"gap_us", a.gap_us},
          {"t2_min_ppm", a.t2_min_ppm},
          {"t2_max_ppm", a.t2_max_ppm},
          {"sweep_points", a.sweep_points},
          {"grid", a.grid}}},
        {"seed", 1},
    };
}

// Overlay user values on the defaults, checking names and JSON types.
void merge(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object()) throw ValidationError((prefix.empty() ? "config" : prefix) + " must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) throw ValidationError("unknown config key '" + key + "'");
        json& slot = base[it.key()];
        const json& v = it.value();
        if (slot.is_object()) {
            merge(slot, v, key);
        } else if (slot.is_array()) {
            if (!v.is_array() || v.size() != slot.size())
                throw ValidationError(key + " must be an array of " + std::to_string(slot.size()) + " numbers");
            for (const auto& e : v)
                if (!e.is_number()) throw ValidationError(key + " must contain numbers");
            slot = v;
        } else if (slot.is_boolean()) {
            if (!v.is_boolean()) throw ValidationError(key + " must be a boolean");
            slot = v;
        } else if (slot.is_string()) {
            if (!v.is_string()) throw ValidationError(key + " must be a string");
            slot = v;
        } else if (slot.is_number_integer()) {
            if (!v.is_number_integer()) throw ValidationError(key + " must be an integer");
            slot = v;
        } else {
            if (!v.is_number()) throw ValidationError(key + " must be a number");
            slot = v.get<double>();
        }
    }
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ValidationError(key + " " + what);
}

GlobalConfig from_canonical(const json& j) {
    GlobalConfig c;
    c.canonical = j;

    const auto& e = j["emitter"];
    c.emitter = default_emitter();
    c.emitter.gamma_total = mhz_to_rad(e["gamma_total_mhz"].get<double>());
    for (int i = 0; i < 3; ++i) c.emitter.branching[i] = e["branching"][i].get<double>();
    c.emitter.b_field_gauss = e["b_field_gauss"].get<double>();
    c.emitter.mu_b_mhz_per_gauss = e["mu_b_mhz_per_gauss"].get<double>();
    require(c.emitter.gamma_total > 0, "emitter.gamma_total_mhz", "must be > 0");
    for (double r : c.emitter.branching) require(r >= 0 && r <= 1, "emitter.branching", "entries must lie in [0,1]");
    require(std::abs(c.emitter.branching[0] + c.emitter.branching[1] + c.emitter.branching[2] - 1.0) <= 1e-3,
            "emitter.branching", "must sum to 1 within 1e-3");
    require(c.emitter.b_field_gauss >= 0, "emitter.b_field_gauss", "must be >= 0");
    require(c.emitter.mu_b_mhz_per_gauss > 0, "emitter.mu_b_mhz_per_gauss", "must be > 0");
    validate(c.emitter);

    const auto& cv = j["cavity"];
    const double l = cv["length_mm"].get<double>() * 1e-3;
    const double rc = cv["mirror_roc_mm"].get<double>() * 1e-3;
    const double lam = cv["wavelength_nm"].get<double>() * 1e-9;
    require(l > 0, "cavity.length_mm", "must be > 0");
    require(rc > 0, "cavity.mirror_roc_mm", "must be > 0");
    require(lam > 0, "cavity.wavelength_nm", "must be > 0");
    require(l < 2 * rc, "cavity.length_mm", "must be < 2 * cavity.mirror_roc_mm (stability)");
    for (const char* k : {"t1_ppm", "t2_ppm", "scatter_absorb_ppm"}) {
        const double v = cv[k].get<double>();
        require(v >= 0 && v < 1e6, std::string("cavity.") + k, "must lie in [0, 1e6)");
    }
    const double speed = cv["speed_of_light_m_s"].get<double>();
    require(speed > 0, "cavity.speed_of_light_m_s", "must be > 0");
    const MirrorSet m{cv["t1_ppm"].get<double>() * kPpm, cv["t2_ppm"].get<double>() * kPpm,
                      cv["scatter_absorb_ppm"].get<double>() * kPpm};
    require(m.t2 + m.alpha_loss() > 0, "cavity.t2_ppm", "plus losses must be > 0");
    c.cavity = make_cavity({l, rc, lam}, m, speed);

    const auto& d = j["drive"];
    auto& ds = c.drive;
    ds.rabi_mhz = d["rabi_mhz"].get<double>();
    ds.rabi2_mhz = d["rabi2_mhz"].get<double>();
    ds.detuning_mhz = d["detuning_mhz"].get<double>();
    ds.duration_us = d["duration_us"].get<double>();
    ds.phase_rad = d["phase_rad"].get<double>();
    ds.jitter_khz = d["jitter_khz"].get<double>();
    ds.sample_dt_us = d["sample_dt_us"].get<double>();
    ds.n_max = d["n_max"].get<int>();
    ds.period_slices = d["period_slices"].get<int>();
    ds.period_samples = d["period_samples"].get<int>();
    ds.light_shift_compensation = d["light_shift_compensation"].get<bool>();
    ds.estimate_reexcitation = d["estimate_reexcitation"].get<bool>();
    ds.method = d["method"].get<std::string>();
    require(ds.rabi_mhz >= 0, "drive.rabi_mhz", "must be >= 0");
    require(ds.rabi2_mhz >= 0, "drive.rabi2_mhz", "must be >= 0");
    require(ds.detuning_mhz != 0, "drive.detuning_mhz", "must be nonzero");
    require(ds.duration_us > 0, "drive.duration_us", "must be > 0");
    require(ds.jitter_khz >= 0, "drive.jitter_khz", "must be >= 0");
    require(ds.sample_dt_us > 0, "drive.sample_dt_us", "must be > 0");
    require(ds.n_max >= 1 && ds.n_max <= 3, "drive.n_max", "must lie in [1, 3]");
    require(ds.period_slices >= 1, "drive.period_slices", "must be >= 1");
    require(ds.period_samples >= 1, "drive.period_samples", "must be >= 1");
    require(ds.method == "propagator" || ds.method == "rk", "drive.method", "must be \"propagator\" or \"rk\"");

    const auto& p = j["path_efficiency"];
    for (const char* k : {"p_el", "p_fc", "p_det"}) {
        const double v = p[k].get<double>();
        require(v > 0 && v <= 1, std::string("path_efficiency.") + k, "must lie in (0,1]");
    }
    for (const char* k : {"p_el_err", "p_fc_err", "p_det_err"})
        require(p[k].get<double>() >= 0, std::string("path_efficiency.") + k, "must be >= 0");
    c.path = {p["p_el"].get<double>(), p["p_el_err"].get<double>(), p["p_fc"].get<double>(),
              p["p_fc_err"].get<double>(), p["p_det"].get<double>(), p["p_det_err"].get<double>()};

    const auto& a = j["analysis"];
    auto& as = c.analysis;
    as.bin_us = a["bin_us"].get<double>();
    as.background_window_us = a["background_window_us"].get<double>();
    as.background_rate_per_s = a["background_rate_per_s"].get<double>();
    as.signal_per_attempt = a["signal_per_attempt"].get<double>();
    as.bootstrap_m = a["bootstrap_m"].get<int>();
    as.n_slots = a["n_slots"].get<int>();
    as.pulse_us = a["pulse_us"].get<double>();
    as.gap_us = a["gap_us"].get<double>();
    as.t2_min_ppm = a["t2_min_ppm"].get<double>();
    as.t2_max_ppm = a["t2_max_ppm"].get<double>();
    as.sweep_points = a["sweep_points"].get<int>();
    as.grid = a["grid"].get<std::string>();
    require(as.bin_us > 0, "analysis.bin_us", "must be > 0");
    require(as.background_window_us >= 0, "analysis.background_window_us", "must be >= 0");
    require(as.background_rate_per_s >= 0, "analysis.background_rate_per_s", "must be >= 0");
    require(as.signal_per_attempt >= 0 && as.signal_per_attempt <= 1, "analysis.signal_per_attempt", "must lie in [0,1]");
    require(as.bootstrap_m >= 2, "analysis.bootstrap_m", "must be >= 2");
    require(as.n_slots >= 1 && as.n_slots <= 32, "analysis.n_slots", "must lie in [1, 32]");
    require(as.pulse_us > 0, "analysis.pulse_us", "must be > 0");
    require(as.gap_us >= 0, "analysis.gap_us", "must be >= 0");
    require(as.t2_min_ppm > 0, "analysis.t2_min_ppm", "must be > 0");
    require(as.t2_max_ppm > as.t2_min_ppm && as.t2_max_ppm < 1e6, "analysis.t2_max_ppm", "must exceed t2_min_ppm and be < 1e6");
    require(as.sweep_points >= 2, "analysis.sweep_points", "must be >= 2");
    require(as.grid == "log" || as.grid == "linear", "analysis.grid", "must be \"log\" or \"linear\"");

    const auto& s = j["seed"];
    require(s.is_number_integer() && s.get<long long>() >= 0, "seed", "must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
    return c;
}

}  // namespace

GlobalConfig default_config() { return from_canonical(defaults()); }

GlobalConfig config_from_json(const json& user) {
    json base = defaults();
    merge(base, user, "");
    return from_canonical(base);
}

GlobalConfig parse_config(const std::string& text) {
    json user;
    try {
        user = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
        throw ParseError("config parse error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + what,
                         line, col);
    }
    return config_from_json(user);
}

GlobalConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

GlobalConfig with_override(const GlobalConfig& cfg, const std::string& key, const json& value) {
    json user = json::object();
    json* node = &user;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
    json base = cfg.canonical;
    merge(base, user, "");
    return from_canonical(base);
}

json to_json(const GlobalConfig& cfg) { return cfg.canonical; }

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const GlobalConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical.dump())));
    return buf;
}

SchemeRates config_scheme(const GlobalConfig& cfg) { return v_scheme_rates(cfg.emitter, std::sqrt(0.5)); }

SimOptions sim_options(const GlobalConfig& cfg) {
    SimOptions o;
    o.n_max = cfg.drive.n_max;
    o.jitter_rate = kTwoPi * cfg.drive.jitter_khz * 1e3;
    o.light_shift_compensation = cfg.drive.light_shift_compensation;
    o.sample_dt = cfg.drive.sample_dt_us * kUs;
    o.period_slices = cfg.drive.period_slices;
    o.period_samples = cfg.drive.period_samples;
    o.method = cfg.drive.method == "rk" ? SimMethod::RungeKutta : SimMethod::Propagator;
    o.estimate_reexcitation = cfg.drive.estimate_reexcitation;
    return o;
}

DriveConfig drive_config(const GlobalConfig& cfg, const SystemModel& model) {
    const auto& d = cfg.drive;
    if (d.rabi2_mhz > 0)
        return bichromatic_drive(model, mhz_to_rad(d.rabi_mhz), mhz_to_rad(d.rabi2_mhz), mhz_to_rad(d.detuning_mhz),
                                 d.phase_rad, d.duration_us * kUs);
    return monochromatic_drive(mhz_to_rad(d.rabi_mhz), mhz_to_rad(d.detuning_mhz), d.duration_us * kUs);
}

}  // namespace cpk
