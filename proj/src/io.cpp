#include "cpk/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

#ifndef CPK_VERSION
#define CPK_VERSION "0.0.0"
#endif

namespace cpk {

using nlohmann::json;

std::string format_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        const auto b = cur.find_first_not_of(" \t\r");
        const auto e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char c : line) {
        if (c == ',') flush();
        else cur += c;
    }
    flush();
    return out;
}

json bounds_report(const GlobalConfig& cfg) {
    const auto& em = cfg.emitter;
    const auto& cav = cfg.cavity;
    const SchemeRates s = config_scheme(cfg);
    const auto ctx = make_coupling(cav, s, em.gamma_total, 1);
    const DesignParams dp = design_params(em, cav, s, 1);
    const DesignResult r = evaluate(dp);
    DesignParams dp1 = dp;
    dp1.zeta = 1.0;
    const double a = cav.mirrors.alpha_loss();
    const double b = design_beta(dp, false), bp = design_beta(dp, true), b1 = design_beta(dp1, false);
    const double ppm = 1.0 / kPpm;
    const double khz = 1.0 / (kTwoPi * 1e3);
    json j;
    j["p_esc"] = r.p_esc;
    j["p_in"] = r.p_in;
    j["p_bound"] = r.p_bound;
    j["p_pure"] = r.p_pure;
    j["pure_fraction"] = r.pure_fraction;
    j["cooperativity"] = ctx.c;
    j["cooperativity_internal"] = ctx.c_in;
    j["g_mhz"] = rad_to_mhz(ctx.g);
    j["g_zeta1_mhz"] = rad_to_mhz(ctx.g / s.zeta);
    j["gamma_g_mhz"] = rad_to_mhz(s.gamma_g);
    j["gamma_u_mhz"] = rad_to_mhz(s.gamma_u);
    j["gamma_o_mhz"] = rad_to_mhz(s.gamma_o);
    j["kappa_khz"] = cav.rates.kappa * khz;
    j["kappa_ext_khz"] = cav.rates.kappa_ext * khz;
    j["kappa_in_khz"] = cav.rates.kappa_in * khz;
    j["finesse"] = cav.rates.finesse;
    j["ringdown_us"] = cav.rates.ringdown / kUs;
    j["w0_um"] = cav.geo.w0 * 1e6;
    j["fsr_mhz"] = cav.geo.fsr / kMHz;
    j["a_tilde"] = cav.geo.a_tilde;
    j["g_parameter"] = cav.geo.g_param;
    j["beta"] = b;
    j["beta_pure"] = bp;
    j["beta_zeta1"] = b1;
    j["t2_opt_ppm"] = t2_optimal(b, a, cav.geo.a_tilde) * ppm;
    j["t2_opt_pure_ppm"] = t2_optimal(bp, a, cav.geo.a_tilde) * ppm;
    j["p_opt"] = p_opt(b, a, cav.geo.a_tilde);
    j["p_opt_pure"] = p_opt(bp, a, cav.geo.a_tilde);
    j["p_opt_zeta1"] = p_opt(b1, a, cav.geo.a_tilde);
    return j;
}

std::string sweep_csv(const SweepCurve& curve, const std::string& x_desc) {
    std::string s = "# x: " + x_desc + "; probabilities dimensionless\n";
    for (const auto& [name, v] : curve.annotations) s += "# " + name + "=" + format_number(v) + "\n";
    s += "x,p_bound,p_pure,p_in,p_esc,pure_fraction\n";
    for (const auto& p : curve.points) {
        s += format_number(p.x) + "," + format_number(p.p_bound) + "," + format_number(p.p_pure) + "," +
             format_number(p.p_in) + "," + format_number(p.p_esc) + "," + format_number(p.pure_fraction) + "\n";
    }
    return s;
}

std::string design_points_csv(const std::vector<std::pair<double, DesignPoint>>& rows, const std::string& x_desc) {
    std::string s = "# x: " + x_desc + "; probabilities dimensionless\n";
    s += "x,p_bound,p_pure,p_in,p_esc,pure_fraction,label\n";
    for (const auto& [x, d] : rows) {
        const auto& r = d.result;
        s += format_number(x) + "," + format_number(r.p_bound) + "," + format_number(r.p_pure) + "," +
             format_number(r.p_in) + "," + format_number(r.p_esc) + "," + format_number(r.pure_fraction) + "," +
             d.label + "\n";
    }
    return s;
}

std::string sim_wavepacket_csv(const Resampled& r) {
    std::string s = "t_us,flux_H_per_s,flux_V_per_s,cum_P_S\n";
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        const double t_us = std::round(r.t[i] / kUs * 1e9) / 1e9;  // strip unit scaling noise
        s += format_number(t_us) + "," + format_number(r.flux_h[i]) + "," + format_number(r.flux_v[i]) + "," +
             format_number(r.cum[i]) + "\n";
    }
    return s;
}

json sim_summary(const SimResult& r, const GlobalConfig& cfg, const StateMetrics* ent) {
    json j;
    j["p_s"] = r.p_s;
    j["p_h"] = r.p_h;
    j["p_v"] = r.p_v;
    j["p_cavity_total"] = r.p_cavity_total;
    j["duration_10_90_us"] = wavepacket_duration(r) / kUs;
    j["max_trace_dev"] = r.max_trace_dev;
    j["min_eigenvalue"] = r.min_eigenvalue;
    j["reduced_dim"] = r.reduced_dim;
    if (r.reexcitation_fraction >= 0) j["reexcitation_fraction"] = r.reexcitation_fraction;
    if (ent) {
        j["fidelity"] = ent->fidelity;
        j["theta"] = ent->theta;
        j["purity"] = ent->purity;
    }
    j["rabi_mhz"] = cfg.drive.rabi_mhz;
    j["rabi2_mhz"] = cfg.drive.rabi2_mhz;
    j["detuning_mhz"] = cfg.drive.detuning_mhz;
    j["duration_us"] = cfg.drive.duration_us;
    return j;
}

std::string counts_csv(const CountTable& c) {
    std::string s = "photon_basis,ion_basis,outcome,counts\n";
    for (int b = 0; b < 9; ++b)
        for (int o = 0; o < 4; ++o)
            s += pauli_name(static_cast<Pauli>(b / 3)) + "," + pauli_name(static_cast<Pauli>(b % 3)) + "," +
                 outcome_label(o) + "," + format_number(c.counts[b][o]) + "\n";
    return s;
}

CountTable parse_counts_csv(const std::string& text) {
    CountTable c;
    std::set<int> seen;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv(line);
        if (!header) {
            if (f.size() != 4 || f[0] != "photon_basis" || f[1] != "ion_basis" || f[2] != "outcome" || f[3] != "counts")
                throw ValidationError("counts CSV header must be photon_basis,ion_basis,outcome,counts");
            header = true;
            continue;
        }
        if (f.size() != 4) throw ValidationError("counts CSV line " + std::to_string(lineno) + ": expected 4 fields");
        const int b = 3 * static_cast<int>(parse_pauli(f[0])) + static_cast<int>(parse_pauli(f[1]));
        const int o = outcome_index(f[2]);
        double n = 0;
        auto res = std::from_chars(f[3].data(), f[3].data() + f[3].size(), n);
        if (res.ec != std::errc() || res.ptr != f[3].data() + f[3].size() || n < 0)
            throw ValidationError("counts CSV line " + std::to_string(lineno) + ": counts must be a non-negative number");
        if (!seen.insert(4 * b + o).second)
            throw ValidationError("counts CSV line " + std::to_string(lineno) + ": duplicate setting/outcome");
        c.counts[b][o] = n;
    }
    if (seen.size() != 36) throw ValidationError("counts CSV must contain all 36 setting/outcome rows");
    return c;
}

json tomo_json(const BootstrapResult& b, const Mat4& rho) {
    json re = json::array(), im = json::array();
    for (int i = 0; i < 4; ++i) {
        json rr = json::array(), ii = json::array();
        for (int k = 0; k < 4; ++k) {
            rr.push_back(rho(i, k).real());
            ii.push_back(rho(i, k).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    json j;
    j["fidelity"] = b.estimate.fidelity;
    j["fidelity_err"] = b.fidelity_std;
    j["purity"] = b.estimate.purity;
    j["purity_err"] = b.purity_std;
    j["theta"] = b.estimate.theta;
    j["rho_real"] = re;
    j["rho_imag"] = im;
    return j;
}

std::string timetags_csv(const TimeTagSet& tags) {
    std::string s = "# attempts=" + std::to_string(tags.attempts) + "\n";
    s += "attempt_index,t_us,detector,pol\n";
    for (const auto& t : tags.tags)
        s += std::to_string(t.attempt) + "," + format_number(t.t_us) + "," + std::to_string(t.detector) + "," + t.pol + "\n";
    return s;
}

TimeTagSet parse_timetags_csv(const std::string& text) {
    TimeTagSet s;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    int lineno = 0;
    long long declared = -1, max_index = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') {
            const auto pos = line.find("attempts=");
            if (pos != std::string::npos) declared = std::atoll(line.c_str() + pos + 9);
            continue;
        }
        const auto f = split_csv(line);
        if (!header) {
            if (f.size() != 4 || f[0] != "attempt_index" || f[1] != "t_us" || f[2] != "detector" || f[3] != "pol")
                throw ValidationError("time-tag CSV header must be attempt_index,t_us,detector,pol");
            header = true;
            continue;
        }
        if (f.size() != 4) throw ValidationError("time-tag CSV line " + std::to_string(lineno) + ": expected 4 fields");
        TimeTag t;
        double tt = 0;
        auto r1 = std::from_chars(f[0].data(), f[0].data() + f[0].size(), t.attempt);
        auto r2 = std::from_chars(f[1].data(), f[1].data() + f[1].size(), tt);
        auto r3 = std::from_chars(f[2].data(), f[2].data() + f[2].size(), t.detector);
        if (r1.ec != std::errc() || r2.ec != std::errc() || r3.ec != std::errc())
            throw ValidationError("time-tag CSV line " + std::to_string(lineno) + ": malformed number");
        t.t_us = tt;
        t.pol = f[3];
        max_index = std::max(max_index, t.attempt);
        s.tags.push_back(std::move(t));
    }
    if (!header) throw ValidationError("time-tag CSV is missing its header");
    s.attempts = declared >= 0 ? declared : max_index + 1;
    return s;
}

std::string analysis_wavepacket_csv(const Wavepacket& wp) {
    std::string s = "t_us,p_d_per_us,p_d_err\n";
    for (std::size_t i = 0; i < wp.p_d.size(); ++i)
        s += format_number(0.5 * (wp.edges_us[i] + wp.edges_us[i + 1])) + "," + format_number(wp.p_d[i]) + "," +
             format_number(wp.p_d_err[i]) + "\n";
    return s;
}

json train_json(const TrainStats& s, const GeometricFit& f) {
    json j;
    j["p_slot"] = s.p_slot;
    j["p_consec"] = s.p_consec;
    j["fit_p"] = f.p;
    j["fit_p_err"] = f.stderr_p;
    return j;
}

std::string utc_timestamp() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::atoll(epoch));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest(const std::string& command, const GlobalConfig& cfg, const std::vector<std::string>& outputs,
              const std::string& started, const std::string& finished) {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash(cfg);
    j["code_version"] = CPK_VERSION;
    j["seed"] = cfg.seed;
    j["started_utc"] = started;
    j["finished_utc"] = finished;
    j["outputs"] = outputs;
    return j;
}

}  // namespace cpk
