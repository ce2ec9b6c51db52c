#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cpk {

struct TimeTag {
    long long attempt;
    double t_us;      // relative to pulse start
    int detector;
    std::string pol;  // may be empty
};

struct TimeTagSet {
    std::vector<TimeTag> tags;
    long long attempts = 0;
    double span_start_us = 0;
    double span_end_us = 0;   // acquisition span; end <= start means "derive from data"
    std::vector<std::pair<double, double>> windows;  // train slots, us
};

struct Wavepacket {
    std::vector<double> edges_us;
    std::vector<double> p_d;      // 1/us
    std::vector<double> p_d_err;  // Poisson, 1/us
    long long attempts;
    double dt_us;
    long long detections;
    bool empty;
};

struct PathEfficiency {
    double p_el = 0.97, p_el_err = 0.01;
    double p_fc = 0.81, p_fc_err = 0.03;
    double p_det = 0.87, p_det_err = 0.02;
    double value() const { return p_el * p_fc * p_det; }
    double error() const;
};

struct Efficiency {
    double p_tot, p_tot_err;
    double p_s, p_s_err;
};

struct TrainStats {
    int n_slots;
    std::vector<double> p_slot;
    std::vector<double> p_consec;      // P(n), n = 1..n_slots
    std::vector<long long> n_consec;   // attempts with slots 1..n all full
    long long attempts;
};

struct GeometricFit {
    double p;
    double stderr_p;
    double chi2;
    int dof;
    bool non_geometric;
};

void validate(const TimeTagSet& tags);

// Earliest tag per attempt (inside [lo, hi) when given).
std::vector<TimeTag> first_per_attempt(const std::vector<TimeTag>& tags, double lo_us, double hi_us);

Wavepacket bin_timetags(const TimeTagSet& tags, double dt_us);
Efficiency integrate_efficiency(const Wavepacket& wp, const PathEfficiency& path);
// Path with the extra wave plates and beam splitter of the polarisation analysis.
PathEfficiency entanglement_path(const PathEfficiency& base);

TrainStats train_statistics(const TimeTagSet& tags);
GeometricFit fit_geometric(const TrainStats& stats);

// Background estimate from a window outside the pulse, counts per second.
double background_rate(const TimeTagSet& tags, double lo_us, double hi_us);

// Consecutive slots of length pulse_us separated by gap_us, starting at 0.
std::vector<std::pair<double, double>> slot_windows(int n_slots, double pulse_us, double gap_us);

// Synthetic train with independent slots; slot k fires with p * (1 - decay)^k.
TimeTagSet synthetic_train(long long attempts, int n_slots, double p, double decay,
                           std::uint64_t seed, double pulse_us = 200, double gap_us = 60);

}  // namespace cpk
