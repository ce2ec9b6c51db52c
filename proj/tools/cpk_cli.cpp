#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpk/cpk.h"

namespace {

struct Common {
    std::string config;
    std::string output;
    std::string manifest;
    std::string summary;
    std::optional<long long> seed;
};

struct CliError {
    int code;
    std::string msg;
};

void check(cpk_status s) {
    if (s != CPK_OK) throw CliError{static_cast<int>(s), cpk_last_error()};
}

// Owns a malloc'd string from the library.
struct Text {
    char* p = nullptr;
    ~Text() { cpk_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct Config {
    cpk_config* p = nullptr;
    ~Config() { cpk_config_free(p); }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const std::string& path, const std::string& content, std::vector<std::string>& written) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content)) throw CliError{CPK_ERR_VALIDATION, "cannot write '" + path + "'"};
    written.push_back(path);
}

std::string now() {
    char buf[32];
    check(cpk_utc_timestamp(buf, sizeof buf));
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity photon extraction toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cpk_version()));

    Common common;
    auto add_common = [&](CLI::App* sub, bool summary) {
        sub->add_option("--config", common.config, "JSON config file");
        sub->add_option("--output", common.output, "output file (default stdout)");
        sub->add_option("--manifest", common.manifest, "run manifest path (default <output>.manifest.json)");
        sub->add_option("--seed", common.seed, "RNG seed override");
        if (summary) sub->add_option("--summary", common.summary, "summary JSON path (default stdout)");
    };

    auto* bounds = app.add_subcommand("bounds", "closed-form extraction bounds");
    add_common(bounds, false);

    double min_ppm = -1, max_ppm = -1;
    int points = -1;
    std::string grid;
    auto* sweep = app.add_subcommand("sweep-t2", "bound versus outcoupling transmission");
    add_common(sweep, false);
    sweep->add_option("--min-ppm", min_ppm, "lowest T2");
    sweep->add_option("--max-ppm", max_ppm, "highest T2");
    sweep->add_option("--points", points, "grid points");
    sweep->add_option("--grid", grid, "log or linear")->check(CLI::IsMember({"log", "linear"}));

    auto* schemes = app.add_subcommand("schemes", "coupling ladder of drive schemes");
    add_common(schemes, false);
    auto* future = app.add_subcommand("future", "projected future systems");
    add_common(future, false);

    std::optional<double> rabi, rabi2, detuning, duration;
    double bin_us = -1;
    auto* simulate = app.add_subcommand("simulate", "master-equation simulation of one attempt");
    add_common(simulate, true);
    simulate->add_option("--rabi-mhz", rabi, "drive Rabi frequency / 2pi");
    simulate->add_option("--rabi2-mhz", rabi2, "second drive component / 2pi (bichromatic when > 0)");
    simulate->add_option("--detuning-mhz", detuning, "drive detuning from P3/2 / 2pi");
    simulate->add_option("--duration-us", duration, "pulse duration");
    simulate->add_option("--bin-us", bin_us, "output time step");

    std::string counts;
    int bootstrap_m = 0;
    auto* tomo = app.add_subcommand("tomo", "ion-photon state tomography");
    add_common(tomo, false);
    tomo->add_option("--counts", counts, "36-row counts CSV")->required();
    tomo->add_option("--bootstrap", bootstrap_m, "bootstrap resamples");

    std::string tags;
    long long attempts = 0;
    auto* train = app.add_subcommand("train", "photon-train statistics");
    add_common(train, false);
    train->add_option("--tags", tags, "time-tag CSV")->required();
    train->add_option("--attempts", attempts, "number of attempts (default from file)");

    auto* wave = app.add_subcommand("wavepacket", "detection wavepacket and efficiency");
    add_common(wave, true);
    wave->add_option("--tags", tags, "time-tag CSV")->required();
    wave->add_option("--attempts", attempts, "number of attempts (default from file)");
    wave->add_option("--bin-us", bin_us, "bin width");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return CPK_ERR_USAGE;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    try {
        const std::string started = now();
        Config cfg;
        if (common.config.empty()) check(cpk_config_default(&cfg.p));
        else check(cpk_config_load(common.config.c_str(), &cfg.p));
        if (common.seed) check(cpk_config_set(cfg.p, "seed", std::to_string(*common.seed).c_str()));

        std::vector<std::string> written;
        if (command == "bounds") {
            Text t;
            check(cpk_bounds(cfg.p, &t.p));
            emit(common.output, t.str(), written);
        } else if (command == "sweep-t2") {
            if (min_ppm >= 0) check(cpk_config_set(cfg.p, "analysis.t2_min_ppm", num(min_ppm).c_str()));
            if (max_ppm >= 0) check(cpk_config_set(cfg.p, "analysis.t2_max_ppm", num(max_ppm).c_str()));
            if (points >= 0) check(cpk_config_set(cfg.p, "analysis.sweep_points", std::to_string(points).c_str()));
            if (!grid.empty()) check(cpk_config_set(cfg.p, "analysis.grid", ("\"" + grid + "\"").c_str()));
            Text t;
            check(cpk_sweep_t2(cfg.p, -1, -1, -1, nullptr, &t.p));
            emit(common.output, t.str(), written);
        } else if (command == "schemes") {
            Text t;
            check(cpk_schemes(cfg.p, &t.p));
            emit(common.output, t.str(), written);
        } else if (command == "future") {
            Text t;
            check(cpk_future(cfg.p, &t.p));
            emit(common.output, t.str(), written);
        } else if (command == "simulate") {
            if (rabi) check(cpk_config_set(cfg.p, "drive.rabi_mhz", num(*rabi).c_str()));
            if (rabi2) check(cpk_config_set(cfg.p, "drive.rabi2_mhz", num(*rabi2).c_str()));
            if (detuning) check(cpk_config_set(cfg.p, "drive.detuning_mhz", num(*detuning).c_str()));
            if (duration) check(cpk_config_set(cfg.p, "drive.duration_us", num(*duration).c_str()));
            if (bin_us > 0) check(cpk_config_set(cfg.p, "analysis.bin_us", num(bin_us).c_str()));
            cpk_sim* sim = nullptr;
            check(cpk_simulate(cfg.p, &sim));
            std::unique_ptr<cpk_sim, void (*)(cpk_sim*)> guard(sim, cpk_sim_free);
            Text csv, summary;
            check(cpk_sim_wavepacket_csv(sim, -1, &csv.p));
            check(cpk_sim_summary(sim, &summary.p));
            emit(common.output, csv.str(), written);
            if (!common.summary.empty() || (!common.output.empty() && common.output != "-"))
                emit(common.summary, summary.str(), written);
        } else if (command == "tomo") {
            Text t;
            check(cpk_tomo(cfg.p, counts.c_str(), bootstrap_m, &t.p));
            emit(common.output, t.str(), written);
        } else if (command == "train") {
            Text t;
            check(cpk_train(cfg.p, tags.c_str(), attempts, &t.p));
            emit(common.output, t.str(), written);
        } else if (command == "wavepacket") {
            if (bin_us > 0) check(cpk_config_set(cfg.p, "analysis.bin_us", num(bin_us).c_str()));
            Text csv, summary;
            check(cpk_wavepacket(cfg.p, tags.c_str(), attempts, -1, &csv.p, &summary.p));
            emit(common.output, csv.str(), written);
            if (!common.summary.empty() || (!common.output.empty() && common.output != "-"))
                emit(common.summary, summary.str(), written);
        } else {
            std::cerr << app.help();
            return CPK_ERR_USAGE;
        }

        std::string manifest_path = common.manifest;
        if (manifest_path.empty() && !written.empty()) manifest_path = written.front() + ".manifest.json";
        if (!manifest_path.empty()) {
            std::vector<const char*> outs;
            for (const auto& w : written) outs.push_back(w.c_str());
            Text m;
            check(cpk_manifest(cfg.p, command.c_str(), outs.data(), outs.size(), started.c_str(), now().c_str(), &m.p));
            std::vector<std::string> ignored;
            emit(manifest_path, m.str(), ignored);
        }
        return 0;
    } catch (const CliError& e) {
        std::cerr << "cpk " << command << ": " << e.msg << "\n";
        return e.code;
    }
}
