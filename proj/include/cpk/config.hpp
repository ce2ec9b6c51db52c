#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

#include "cpk/analysis.hpp"
#include "cpk/atomic.hpp"
#include "cpk/cavity.hpp"
#include "cpk/cmrt.hpp"

namespace cpk {

struct DriveSettings {
    double rabi_mhz = 14;
    double rabi2_mhz = 0;
    double detuning_mhz = -403;
    double duration_us = 400;
    double phase_rad = 0;
    double jitter_khz = 10;
    double sample_dt_us = 0.02;
    int n_max = 1;
    int period_slices = 64;
    int period_samples = 4;
    bool light_shift_compensation = true;
    bool estimate_reexcitation = true;
    std::string method = "propagator";
};

struct AnalysisSettings {
    double bin_us = 1.2;
    double background_window_us = 60;
    double background_rate_per_s = 20;
    double signal_per_attempt = 0.462;
    int bootstrap_m = 200;
    int n_slots = 15;
    double pulse_us = 200;
    double gap_us = 60;
    double t2_min_ppm = 10;
    double t2_max_ppm = 1000;
    int sweep_points = 200;
    std::string grid = "log";
};

struct GlobalConfig {
    EmitterModel emitter;
    CavityModel cavity;
    DriveSettings drive;
    PathEfficiency path;
    AnalysisSettings analysis;
    std::uint64_t seed = 1;
    nlohmann::json canonical;  // defaults merged with user input
};

GlobalConfig default_config();
// Unknown keys and wrong types are validation errors naming the dotted key.
GlobalConfig config_from_json(const nlohmann::json& user);
GlobalConfig parse_config(const std::string& text);
GlobalConfig load_config(const std::string& path);

// Returns a copy with one dotted key (e.g. "drive.rabi_mhz") replaced, revalidated.
GlobalConfig with_override(const GlobalConfig& cfg, const std::string& key, const nlohmann::json& value);

nlohmann::json to_json(const GlobalConfig& cfg);
std::string config_hash(const GlobalConfig& cfg);
std::uint64_t fnv1a64(const std::string& s);

SchemeRates config_scheme(const GlobalConfig& cfg);
SimOptions sim_options(const GlobalConfig& cfg);
DriveConfig drive_config(const GlobalConfig& cfg, const SystemModel& model);

}  // namespace cpk
