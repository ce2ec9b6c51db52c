#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cpk/atomic.hpp"
#include "cpk/cavity.hpp"

namespace cpk {

// Everything the closed-form bounds need. Loss quantities are fractions.
struct DesignParams {
    double gamma;
    double gamma_g;
    double gamma_u;
    double zeta;
    int n_ions = 1;
    double coupling_scale = 1.0;  // multiplies g^2, used by the g-ratio axis
    double a_tilde;
    double alpha_loss;
    double t2;
};

struct DesignResult {
    double c;
    double p_in;
    double p_esc;
    double p_bound;
    double p_pure;
    double pure_fraction;
};

struct DesignPoint {
    std::string label;
    DesignParams params;
    DesignResult result;
};

enum class Grid { Log, Linear };

struct SweepPoint {
    double x;
    double p_bound;
    double p_pure;
    double p_in;
    double p_esc;
    double pure_fraction;
};

struct SweepCurve {
    std::string axis;  // "t2" or "g_ratio"
    std::vector<SweepPoint> points;
    std::vector<std::pair<std::string, double>> annotations;
};

enum class FutureId { LowLoss, SmallWaist, TenIon };

DesignParams design_params(const EmitterModel& em, const CavityModel& cav, const SchemeRates& s,
                           int n_ions = 1);
DesignResult evaluate(const DesignParams& p);

double design_beta(const DesignParams& p, bool pure);

std::vector<double> make_grid(double lo, double hi, int n, Grid grid);

// Range, x and annotations are in multiples of unit (e.g. 1e-6 for ppm).
SweepCurve sweep_t2(const DesignParams& base, double t2_min, double t2_max, int n_points,
                    Grid grid = Grid::Log, double unit = 1.0);
SweepCurve sweep_g_ratio(const DesignParams& base, double r_min, double r_max, int n_points,
                         Grid grid = Grid::Linear);

std::vector<DesignPoint> scheme_ladder(const DesignParams& base);

// waist_as_area selects the input path for the small-waist case: rescale A~ by
// (w/w0)^2 instead of recomputing it from the new waist.
DesignPoint evaluate_future(FutureId id, const DesignParams& base, const CavityModel& cav,
                            bool waist_as_area = false);
FutureId parse_future_id(const std::string& s);
std::string future_label(FutureId id);

}  // namespace cpk
