#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "cpk/analysis.hpp"
#include "cpk/bounds.hpp"
#include "cpk/cmrt.hpp"
#include "cpk/config.hpp"
#include "cpk/design.hpp"
#include "cpk/tomography.hpp"

namespace cpk {

// Shortest round-trip decimal representation; locale independent.
std::string format_number(double v);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Splits one CSV line on commas and trims blanks. No quoting support.
std::vector<std::string> split_csv(const std::string& line);

nlohmann::json bounds_report(const GlobalConfig& cfg);

// x_desc names the x unit in the leading comment line.
std::string sweep_csv(const SweepCurve& curve, const std::string& x_desc);
std::string design_points_csv(const std::vector<std::pair<double, DesignPoint>>& rows, const std::string& x_desc);

std::string sim_wavepacket_csv(const Resampled& r);
nlohmann::json sim_summary(const SimResult& r, const GlobalConfig& cfg, const StateMetrics* ent);

std::string counts_csv(const CountTable& c);
CountTable parse_counts_csv(const std::string& text);
nlohmann::json tomo_json(const BootstrapResult& b, const Mat4& rho);

std::string timetags_csv(const TimeTagSet& tags);
// "# attempts=N" comment sets attempts; otherwise max index + 1.
TimeTagSet parse_timetags_csv(const std::string& text);

std::string analysis_wavepacket_csv(const Wavepacket& wp);
nlohmann::json train_json(const TrainStats& s, const GeometricFit& f);

nlohmann::json manifest(const std::string& command, const GlobalConfig& cfg,
                        const std::vector<std::string>& outputs, const std::string& started,
                        const std::string& finished);
std::string utc_timestamp();

}  // namespace cpk
