#include "cpk/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "cpk/errors.hpp"
#include "cpk/tomography.hpp"

namespace cpk {

double PathEfficiency::error() const {
    const double rel = std::hypot(std::hypot(p_el_err / p_el, p_fc_err / p_fc), p_det_err / p_det);
    return value() * rel;
}

void validate(const TimeTagSet& tags) {
    if (tags.attempts < 0) throw ValidationError("attempts must be >= 0");
    const bool has_span = tags.span_end_us > tags.span_start_us;
    for (const auto& t : tags.tags) {
        if (t.attempt < 0 || t.attempt >= tags.attempts)
            throw ValidationError("attempt_index " + std::to_string(t.attempt) + " outside [0, attempts)");
        if (has_span && (t.t_us < tags.span_start_us || t.t_us > tags.span_end_us))
            throw ValidationError("detection time outside the acquisition span");
    }
}

std::vector<TimeTag> first_per_attempt(const std::vector<TimeTag>& tags, double lo_us, double hi_us) {
    const bool bounded = hi_us > lo_us;
    std::map<long long, TimeTag> first;
    for (const auto& t : tags) {
        if (bounded && (t.t_us < lo_us || t.t_us >= hi_us)) continue;
        auto it = first.find(t.attempt);
        if (it == first.end() || t.t_us < it->second.t_us) first[t.attempt] = t;
    }
    std::vector<TimeTag> out;
    out.reserve(first.size());
    for (auto& [k, v] : first) out.push_back(v);
    return out;
}

Wavepacket bin_timetags(const TimeTagSet& tags, double dt_us) {
    if (!(dt_us > 0)) throw ValidationError("bin width must be > 0");
    if (tags.attempts <= 0) throw ValidationError("attempts must be > 0");
    validate(tags);
    double lo = tags.span_start_us, hi = tags.span_end_us;
    if (!(hi > lo)) {
        lo = 0;
        hi = 0;
        for (const auto& t : tags.tags) hi = std::max(hi, t.t_us);
        hi = std::max(hi, dt_us);
    }
    const auto firsts = first_per_attempt(tags.tags, lo, hi + 1e-12);
    const int nbins = std::max(1, static_cast<int>(std::ceil((hi - lo) / dt_us - 1e-9)));
    Wavepacket wp;
    wp.attempts = tags.attempts;
    wp.dt_us = dt_us;
    wp.detections = static_cast<long long>(firsts.size());
    wp.empty = firsts.empty();
    std::vector<long long> n(nbins, 0);
    for (const auto& t : firsts) {
        int b = static_cast<int>(std::floor((t.t_us - lo) / dt_us));
        n[std::clamp(b, 0, nbins - 1)] += 1;
    }
    const double norm = static_cast<double>(tags.attempts) * dt_us;
    for (int b = 0; b <= nbins; ++b) wp.edges_us.push_back(lo + b * dt_us);
    for (int b = 0; b < nbins; ++b) {
        wp.p_d.push_back(n[b] / norm);
        wp.p_d_err.push_back(std::sqrt(static_cast<double>(n[b])) / norm);
    }
    return wp;
}

Efficiency integrate_efficiency(const Wavepacket& wp, const PathEfficiency& path) {
    const double pp = path.value();
    if (!(pp > 0 && pp <= 1)) throw ValidationError("path efficiency must lie in (0,1]");
    Efficiency e{};
    double n = 0;
    for (double p : wp.p_d) e.p_tot += p * wp.dt_us;
    n = e.p_tot * wp.attempts;
    e.p_tot_err = std::sqrt(n) / wp.attempts;
    e.p_s = e.p_tot / pp;
    if (e.p_s > 1.0) throw ValidationError("P_S > 1 after path correction: calibration inconsistent");
    const double rel_tot = e.p_tot > 0 ? e.p_tot_err / e.p_tot : 0.0;
    e.p_s_err = e.p_s * std::hypot(rel_tot, path.error() / pp);
    return e;
}

PathEfficiency entanglement_path(const PathEfficiency& base) {
    PathEfficiency p = base;
    p.p_el = base.p_el - 0.01;
    return p;
}

TrainStats train_statistics(const TimeTagSet& tags) {
    if (tags.windows.empty()) throw ValidationError("train analysis needs slot windows");
    if (tags.attempts <= 0) throw ValidationError("attempts must be > 0");
    for (std::size_t i = 0; i < tags.windows.size(); ++i) {
        if (!(tags.windows[i].second > tags.windows[i].first))
            throw ValidationError("slot window end must exceed start");
        if (i > 0 && tags.windows[i].first < tags.windows[i - 1].second)
            throw ValidationError("slot windows overlap or are out of order");
    }
    validate(tags);
    const int ns = static_cast<int>(tags.windows.size());
    // bit k of mask set when slot k saw a detection
    std::map<long long, std::uint32_t> mask;
    for (const auto& t : tags.tags) {
        for (int k = 0; k < ns; ++k) {
            if (t.t_us >= tags.windows[k].first && t.t_us < tags.windows[k].second) {
                mask[t.attempt] |= (1u << k);
                break;
            }
        }
    }
    TrainStats s;
    s.n_slots = ns;
    s.attempts = tags.attempts;
    std::vector<long long> slot(ns, 0), consec(ns, 0);
    for (const auto& [att, m] : mask) {
        for (int k = 0; k < ns; ++k)
            if (m & (1u << k)) ++slot[k];
        for (int k = 0; k < ns && (m & (1u << k)); ++k) ++consec[k];
    }
    const double k = static_cast<double>(tags.attempts);
    for (int i = 0; i < ns; ++i) {
        s.p_slot.push_back(slot[i] / k);
        s.p_consec.push_back(consec[i] / k);
        s.n_consec.push_back(consec[i]);
    }
    for (int i = 1; i < ns; ++i)
        if (s.p_consec[i] > s.p_consec[i - 1]) throw ComputationError("P(n) is not monotone");
    return s;
}

GeometricFit fit_geometric(const TrainStats& stats) {
    // log P(n) = n log p, weighted by the inverse binomial variance of log P.
    std::vector<double> n, y, w, var;
    for (int i = 0; i < static_cast<int>(stats.p_consec.size()); ++i) {
        const double p = stats.p_consec[i];
        if (p <= 0 || p >= 1) continue;
        n.push_back(i + 1.0);
        y.push_back(std::log(p));
        var.push_back((1.0 - p) / (stats.attempts * p));
        w.push_back(1.0 / var.back());
    }
    const int k = static_cast<int>(n.size());
    if (k < 2) throw InsufficientDataError("geometric fit needs at least 2 nonzero P(n) points");
    double swx2 = 0, swxy = 0;
    for (int i = 0; i < k; ++i) {
        swx2 += w[i] * n[i] * n[i];
        swxy += w[i] * n[i] * y[i];
    }
    const double slope = swxy / swx2;

    // P(n) are nested fractions of the same attempts, so cov(log P_m, log P_n) = var(log P_min(m,n)).
    // The slope error is the sandwich over that covariance; chi2 uses its inverse.
    Eigen::MatrixXd cov(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) cov(i, j) = var[std::min(i, j)];
    Eigen::VectorXd a(k), r(k);
    for (int i = 0; i < k; ++i) {
        a[i] = w[i] * n[i] / swx2;
        r[i] = y[i] - slope * n[i];
    }
    GeometricFit fit{};
    fit.p = std::exp(slope);
    fit.stderr_p = fit.p * std::sqrt(a.dot(cov * a));
    fit.chi2 = r.dot(cov.ldlt().solve(r));
    fit.dof = k - 1;
    fit.non_geometric = fit.chi2 > fit.dof + 3.0 * std::sqrt(2.0 * fit.dof);
    return fit;
}

double background_rate(const TimeTagSet& tags, double lo_us, double hi_us) {
    if (!(hi_us > lo_us)) throw ValidationError("background window must have positive length");
    if (tags.attempts <= 0) throw ValidationError("attempts must be > 0");
    long long n = 0;
    for (const auto& t : tags.tags)
        if (t.t_us >= lo_us && t.t_us < hi_us) ++n;
    return n / (tags.attempts * (hi_us - lo_us) * 1e-6);
}

std::vector<std::pair<double, double>> slot_windows(int n_slots, double pulse_us, double gap_us) {
    if (n_slots < 1 || n_slots > 32) throw ValidationError("n_slots must lie in [1, 32]");
    if (!(pulse_us > 0) || !(gap_us >= 0)) throw ValidationError("slot pulse must be > 0 and gap >= 0");
    std::vector<std::pair<double, double>> w;
    for (int k = 0; k < n_slots; ++k) {
        const double start = k * (pulse_us + gap_us);
        w.emplace_back(start, start + pulse_us);
    }
    return w;
}

TimeTagSet synthetic_train(long long attempts, int n_slots, double p, double decay,
                           std::uint64_t seed, double pulse_us, double gap_us) {
    TimeTagSet s;
    s.attempts = attempts;
    s.windows = slot_windows(n_slots, pulse_us, gap_us);
    s.span_start_us = 0;
    s.span_end_us = s.windows.back().second;
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (long long a = 0; a < attempts; ++a) {
        double pk = p;
        for (int k = 0; k < n_slots; ++k) {
            if (u(rng) < pk) s.tags.push_back({a, s.windows[k].first + 0.5 * pulse_us * u(rng), 0, "V"});
            pk *= (1.0 - decay);
        }
    }
    return s;
}

}  // namespace cpk
