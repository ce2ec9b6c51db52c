#include "cpk/cpk.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "cpk/analysis.hpp"
#include "cpk/cmrt.hpp"
#include "cpk/config.hpp"
#include "cpk/constants.hpp"
#include "cpk/design.hpp"
#include "cpk/errors.hpp"
#include "cpk/io.hpp"
#include "cpk/tomography.hpp"

struct cpk_config {
    cpk::GlobalConfig cfg;
};

struct cpk_sim {
    cpk::SimResult result;
    bool has_metrics = false;
    cpk::StateMetrics metrics{};
    cpk::GlobalConfig cfg;
};

namespace {

thread_local std::string g_last_error;

cpk_status fail(cpk_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

template <class F>
cpk_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return CPK_OK;
    } catch (const cpk::ValidationError& e) {
        return fail(CPK_ERR_VALIDATION, e.what());
    } catch (const cpk::ComputationError& e) {
        return fail(CPK_ERR_COMPUTATION, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CPK_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CPK_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CPK_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void need(const void* p, const char* what) {
    if (!p) throw cpk::ValidationError(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* cpk_last_error(void) { return g_last_error.c_str(); }

const char* cpk_version(void) { return CPK_VERSION; }

void cpk_string_free(char* s) { std::free(s); }

cpk_status cpk_config_default(cpk_config** out) {
    return guard([&] {
        need(out, "out");
        *out = new cpk_config{cpk::default_config()};
    });
}

cpk_status cpk_config_load(const char* path, cpk_config** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new cpk_config{cpk::load_config(path)};
    });
}

cpk_status cpk_config_parse(const char* json_text, cpk_config** out) {
    return guard([&] {
        need(json_text, "json_text");
        need(out, "out");
        *out = new cpk_config{cpk::parse_config(json_text)};
    });
}

void cpk_config_free(cpk_config* cfg) { delete cfg; }

cpk_status cpk_config_set(cpk_config* cfg, const char* key, const char* json_value) {
    return guard([&] {
        need(cfg, "cfg");
        need(key, "key");
        need(json_value, "json_value");
        nlohmann::json v;
        try {
            v = nlohmann::json::parse(json_value);
        } catch (const nlohmann::json::parse_error&) {
            throw cpk::ValidationError(std::string(key) + ": value is not valid JSON");
        }
        cfg->cfg = cpk::with_override(cfg->cfg, key, v);
    });
}

cpk_status cpk_config_to_json(const cpk_config* cfg, char** out) {
    return guard([&] {
        need(cfg, "cfg");
        need(out, "out");
        *out = dup(cpk::to_json(cfg->cfg).dump(2) + "\n");
    });
}

cpk_status cpk_config_hash(const cpk_config* cfg, char* buf, size_t len) {
    return guard([&] {
        need(cfg, "cfg");
        need(buf, "buf");
        const std::string h = cpk::config_hash(cfg->cfg);
        if (len < h.size() + 1) throw cpk::ValidationError("hash buffer too small");
        std::memcpy(buf, h.c_str(), h.size() + 1);
    });
}

cpk_status cpk_bounds(const cpk_config* cfg, char** json_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(json_out, "json_out");
        *json_out = dup(cpk::bounds_report(cfg->cfg).dump(2) + "\n");
    });
}

cpk_status cpk_sweep_t2(const cpk_config* cfg, double min_ppm, double max_ppm, int points, const char* grid,
                        char** csv_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(csv_out, "csv_out");
        const auto& c = cfg->cfg;
        const std::string g = grid ? grid : c.analysis.grid;
        cpk::Grid gr;
        if (g == "log") gr = cpk::Grid::Log;
        else if (g == "linear") gr = cpk::Grid::Linear;
        else throw cpk::ValidationError("grid must be 'log' or 'linear'");
        const auto base = cpk::design_params(c.emitter, c.cavity, cpk::config_scheme(c), 1);
        const double lo = min_ppm > 0 ? min_ppm : c.analysis.t2_min_ppm;
        const double hi = max_ppm > 0 ? max_ppm : c.analysis.t2_max_ppm;
        const int n = points > 0 ? points : c.analysis.sweep_points;
        const auto curve = cpk::sweep_t2(base, lo, hi, n, gr, cpk::kPpm);
        *csv_out = dup(cpk::sweep_csv(curve, "T2 transmission in ppm"));
    });
}

cpk_status cpk_schemes(const cpk_config* cfg, char** csv_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(csv_out, "csv_out");
        const auto& c = cfg->cfg;
        const auto base = cpk::design_params(c.emitter, c.cavity, cpk::config_scheme(c), 1);
        const auto ladder = cpk::scheme_ladder(base);
        const double ref = base.zeta * base.zeta * base.n_ions;
        std::vector<std::pair<double, cpk::DesignPoint>> rows;
        for (const auto& p : ladder)
            rows.emplace_back(std::sqrt(p.params.zeta * p.params.zeta * p.params.n_ions * p.params.coupling_scale / ref), p);
        *csv_out = dup(cpk::design_points_csv(rows, "coupling ratio g/g_A (dimensionless)"));
    });
}

cpk_status cpk_future(const cpk_config* cfg, char** csv_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(csv_out, "csv_out");
        const auto& c = cfg->cfg;
        const auto base = cpk::design_params(c.emitter, c.cavity, cpk::config_scheme(c), 1);
        std::vector<std::pair<double, cpk::DesignPoint>> rows;
        for (auto id : {cpk::FutureId::LowLoss, cpk::FutureId::SmallWaist, cpk::FutureId::TenIon}) {
            const auto p = cpk::evaluate_future(id, base, c.cavity);
            rows.emplace_back(std::round(p.params.t2 / cpk::kPpm * 1e6) / 1e6, p);  // strip ppm scaling noise
        }
        *csv_out = dup(cpk::design_points_csv(rows, "T2 transmission in ppm"));
    });
}

cpk_status cpk_simulate(const cpk_config* cfg, cpk_sim** out) {
    return guard([&] {
        need(cfg, "cfg");
        need(out, "out");
        const auto& c = cfg->cfg;
        const auto opt = cpk::sim_options(c);
        const auto model = cpk::build_system(c.emitter, c.cavity, opt);
        auto sim = std::make_unique<cpk_sim>();
        sim->cfg = c;
        if (c.drive.rabi2_mhz > 0) {
            auto e = cpk::simulate_entanglement(model, cpk::mhz_to_rad(c.drive.rabi_mhz),
                                                cpk::mhz_to_rad(c.drive.rabi2_mhz),
                                                cpk::mhz_to_rad(c.drive.detuning_mhz), c.drive.phase_rad,
                                                c.drive.duration_us * cpk::kUs, opt);
            sim->result = std::move(e.sim);
            sim->metrics = e.metrics;
            sim->has_metrics = true;
        } else {
            sim->result = cpk::evolve(model, cpk::drive_config(c, model), opt);
        }
        *out = sim.release();
    });
}

cpk_status cpk_sim_summary(const cpk_sim* sim, char** json_out) {
    return guard([&] {
        need(sim, "sim");
        need(json_out, "json_out");
        const auto j = cpk::sim_summary(sim->result, sim->cfg, sim->has_metrics ? &sim->metrics : nullptr);
        *json_out = dup(j.dump(2) + "\n");
    });
}

cpk_status cpk_sim_wavepacket_csv(const cpk_sim* sim, double bin_us, char** csv_out) {
    return guard([&] {
        need(sim, "sim");
        need(csv_out, "csv_out");
        const double bin = bin_us > 0 ? bin_us : sim->cfg.analysis.bin_us;
        *csv_out = dup(cpk::sim_wavepacket_csv(cpk::resample(sim->result, bin * cpk::kUs)));
    });
}

double cpk_sim_p_s(const cpk_sim* sim) { return sim ? sim->result.p_s : -1.0; }

void cpk_sim_free(cpk_sim* sim) { delete sim; }

cpk_status cpk_tomo(const cpk_config* cfg, const char* counts_path, int bootstrap_m, char** json_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(counts_path, "counts_path");
        need(json_out, "json_out");
        const auto& c = cfg->cfg;
        auto counts = cpk::parse_counts_csv(cpk::read_file(counts_path));
        counts.window = c.analysis.background_window_us * cpk::kUs;
        counts.background_rate = c.analysis.background_rate_per_s;
        const int m = bootstrap_m > 0 ? bootstrap_m : c.analysis.bootstrap_m;
        const auto rec = cpk::reconstruct(counts);
        const auto b = cpk::bootstrap(counts, m, c.seed);
        auto j = cpk::tomo_json(b, rec.rho);
        j["background_fidelity_limit"] = cpk::background_fidelity_limit(
            c.analysis.signal_per_attempt, counts.background_rate, counts.window);
        j["resamples"] = b.resamples;
        j["low_confidence"] = b.low_confidence;
        *json_out = dup(j.dump(2) + "\n");
    });
}

namespace {

cpk::TimeTagSet load_tags(const char* path, long long attempts) {
    auto tags = cpk::parse_timetags_csv(cpk::read_file(path));
    if (attempts > 0) tags.attempts = attempts;
    return tags;
}

}  // namespace

cpk_status cpk_train(const cpk_config* cfg, const char* tags_path, long long attempts, char** json_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(tags_path, "tags_path");
        need(json_out, "json_out");
        const auto& a = cfg->cfg.analysis;
        auto tags = load_tags(tags_path, attempts);
        tags.windows = cpk::slot_windows(a.n_slots, a.pulse_us, a.gap_us);
        const auto stats = cpk::train_statistics(tags);
        const auto fit = cpk::fit_geometric(stats);
        auto j = cpk::train_json(stats, fit);
        j["attempts"] = stats.attempts;
        j["fit_chi2"] = fit.chi2;
        j["fit_dof"] = fit.dof;
        j["non_geometric"] = fit.non_geometric;
        *json_out = dup(j.dump(2) + "\n");
    });
}

cpk_status cpk_wavepacket(const cpk_config* cfg, const char* tags_path, long long attempts, double bin_us,
                          char** csv_out, char** summary_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(tags_path, "tags_path");
        need(csv_out, "csv_out");
        const auto& c = cfg->cfg;
        const auto tags = load_tags(tags_path, attempts);
        const auto wp = cpk::bin_timetags(tags, bin_us > 0 ? bin_us : c.analysis.bin_us);
        const std::string csv = cpk::analysis_wavepacket_csv(wp);
        if (summary_out) {
            nlohmann::json j;
            j["attempts"] = wp.attempts;
            j["detections"] = wp.detections;
            j["bin_us"] = wp.dt_us;
            j["empty"] = wp.empty;
            j["p_path"] = c.path.value();
            j["p_path_err"] = c.path.error();
            if (!wp.empty) {
                const auto eff = cpk::integrate_efficiency(wp, c.path);
                j["p_tot"] = eff.p_tot;
                j["p_tot_err"] = eff.p_tot_err;
                j["p_s"] = eff.p_s;
                j["p_s_err"] = eff.p_s_err;
            }
            *summary_out = dup(j.dump(2) + "\n");
        }
        *csv_out = dup(csv);
    });
}

cpk_status cpk_utc_timestamp(char* buf, size_t len) {
    return guard([&] {
        need(buf, "buf");
        const std::string t = cpk::utc_timestamp();
        if (len < t.size() + 1) throw cpk::ValidationError("timestamp buffer too small");
        std::memcpy(buf, t.c_str(), t.size() + 1);
    });
}

cpk_status cpk_manifest(const cpk_config* cfg, const char* command, const char* const* outputs, size_t n_outputs,
                        const char* started_utc, const char* finished_utc, char** json_out) {
    return guard([&] {
        need(cfg, "cfg");
        need(command, "command");
        need(json_out, "json_out");
        if (n_outputs > 0) need(outputs, "outputs");
        std::vector<std::string> outs;
        for (size_t i = 0; i < n_outputs; ++i) {
            need(outputs[i], "outputs[i]");
            outs.emplace_back(outputs[i]);
        }
        const auto j = cpk::manifest(command, cfg->cfg, outs, started_utc ? started_utc : "",
                                     finished_utc ? finished_utc : "");
        *json_out = dup(j.dump(2) + "\n");
    });
}

}  // extern "C"
