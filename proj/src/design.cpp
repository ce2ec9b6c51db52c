#include "cpk/design.hpp"

#include <cmath>

#include "cpk/bounds.hpp"
#include "cpk/constants.hpp"
#include "cpk/errors.hpp"
#include "cpk/parallel.hpp"

namespace cpk {

DesignParams design_params(const EmitterModel& em, const CavityModel& cav, const SchemeRates& s,
                           int n_ions) {
    DesignParams p{};
    p.gamma = em.gamma_total;
    p.gamma_g = s.gamma_g;
    p.gamma_u = s.gamma_u;
    p.zeta = s.zeta;
    p.n_ions = n_ions;
    p.a_tilde = cav.geo.a_tilde;
    p.alpha_loss = cav.mirrors.alpha_loss();
    p.t2 = cav.mirrors.t2;
    return p;
}

DesignResult evaluate(const DesignParams& p) {
    if (p.n_ions < 1) throw ValidationError("n_ions must be >= 1");
    DesignResult r{};
    r.c = p.coupling_scale *
          cooperativity_mode_area(p.zeta, p.n_ions, p.gamma_g, p.gamma, p.a_tilde, p.t2 + p.alpha_loss);
    const double r_u = p.gamma_u / p.gamma;
    const auto full = p_bound({r.c, r_u, p.t2, p.alpha_loss, Variant::Full});
    const auto pure = p_bound({r.c, r_u, p.t2, p.alpha_loss, Variant::Pure});
    r.p_in = full.p_in;
    r.p_esc = full.p_esc;
    r.p_bound = full.p_s;
    r.p_pure = pure.p_s;
    r.pure_fraction = r.p_bound > 0 ? r.p_pure / r.p_bound : 0.0;
    return r;
}

double design_beta(const DesignParams& p, bool pure) {
    const double scale = p.zeta * p.zeta * p.n_ions * p.coupling_scale;
    return pure ? scale * p.gamma_g / p.gamma : scale * p.gamma_g / (p.gamma - p.gamma_u);
}

std::vector<double> make_grid(double lo, double hi, int n, Grid grid) {
    if (n < 2) throw ValidationError("sweep needs at least 2 points");
    if (!(lo < hi)) throw ValidationError("sweep range must satisfy min < max");
    if (grid == Grid::Log && !(lo > 0)) throw ValidationError("log grid needs min > 0");
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        x[i] = grid == Grid::Log ? std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo)))
                                 : lo + f * (hi - lo);
    }
    x.front() = lo;
    x.back() = hi;
    return x;
}

namespace {

SweepPoint to_point(double x, const DesignResult& r) {
    return {x, r.p_bound, r.p_pure, r.p_in, r.p_esc, r.pure_fraction};
}

}  // namespace

SweepCurve sweep_t2(const DesignParams& base, double t2_min, double t2_max, int n_points, Grid grid,
                    double unit) {
    if (!(unit > 0)) throw ValidationError("sweep unit must be > 0");
    if (!(t2_min > 0 && t2_max * unit < 1)) throw ValidationError("t2 range must lie in (0,1)");
    const auto xs = make_grid(t2_min, t2_max, n_points, grid);
    SweepCurve curve;
    curve.axis = "t2";
    curve.points.resize(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        DesignParams p = base;
        p.t2 = xs[i] * unit;
        curve.points[i] = to_point(xs[i], evaluate(p));
    });
    curve.annotations.emplace_back("t2_opt", t2_optimal(design_beta(base, false), base.alpha_loss, base.a_tilde) / unit);
    curve.annotations.emplace_back("t2_opt_pure",
                                   t2_optimal(design_beta(base, true), base.alpha_loss, base.a_tilde) / unit);
    return curve;
}

SweepCurve sweep_g_ratio(const DesignParams& base, double r_min, double r_max, int n_points, Grid grid) {
    if (!(r_min > 0)) throw ValidationError("g ratio range must be > 0");
    const auto xs = make_grid(r_min, r_max, n_points, grid);
    SweepCurve curve;
    curve.axis = "g_ratio";
    curve.points.resize(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        DesignParams p = base;
        p.coupling_scale = base.coupling_scale * xs[i] * xs[i];
        curve.points[i] = to_point(xs[i], evaluate(p));
    });
    // ladder markers: g of schemes B-D relative to the base coupling
    const double ref = base.zeta * base.zeta * base.n_ions * base.coupling_scale;
    curve.annotations.emplace_back("B", std::sqrt(1.0 / ref));
    curve.annotations.emplace_back("C", std::sqrt(2.0 / ref));
    curve.annotations.emplace_back("D", std::sqrt(3.0 / ref));
    return curve;
}

std::vector<DesignPoint> scheme_ladder(const DesignParams& base) {
    struct Scheme {
        const char* label;
        double zeta;
        int n;
    };
    const Scheme schemes[] = {{"A", std::sqrt(0.5), 1}, {"B", 1.0, 1}, {"C", 1.0, 2}, {"D", 1.0, 3}};
    std::vector<DesignPoint> out;
    for (const auto& s : schemes) {
        DesignParams p = base;
        p.zeta = s.zeta;
        p.n_ions = s.n;
        out.push_back({s.label, p, evaluate(p)});
    }
    return out;
}

FutureId parse_future_id(const std::string& s) {
    if (s == "low-loss") return FutureId::LowLoss;
    if (s == "small-waist") return FutureId::SmallWaist;
    if (s == "ten-ion") return FutureId::TenIon;
    throw ValidationError("unknown future configuration '" + s + "'");
}

std::string future_label(FutureId id) {
    switch (id) {
        case FutureId::LowLoss: return "low-loss";
        case FutureId::SmallWaist: return "small-waist";
        case FutureId::TenIon: return "ten-ion";
    }
    return "?";
}

DesignPoint evaluate_future(FutureId id, const DesignParams& base, const CavityModel& cav,
                            bool waist_as_area) {
    DesignParams p = base;
    p.zeta = 1.0;
    p.n_ions = 1;
    switch (id) {
        case FutureId::LowLoss:
            p.alpha_loss = 2.7e-6;
            p.t2 = 25e-6;
            break;
        case FutureId::SmallWaist: {
            const double w = 3.9e-6;
            if (waist_as_area) {
                p.a_tilde = base.a_tilde * (w / cav.geo.w0) * (w / cav.geo.w0);
            } else {
                p.a_tilde = (kPi * w * w / 4.0) / cav.geo.sigma;
            }
            p.t2 = 252e-6;
            break;
        }
        case FutureId::TenIon:
            p.n_ions = 10;
            p.t2 = 252e-6;
            break;
    }
    return {future_label(id), p, evaluate(p)};
}

}  // namespace cpk
