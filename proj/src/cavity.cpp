#include "cpk/cavity.hpp"

#include <cmath>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

namespace cpk {

GeometryDerived derive_geometry(const CavityGeometry& g, double c) {
    if (!(g.length > 0 && g.mirror_roc > 0 && g.wavelength > 0))
        throw ValidationError("cavity length, mirror radius and wavelength must be > 0");
    if (g.length >= 2.0 * g.mirror_roc)
        throw ValidationError("unstable cavity geometry: length >= 2 R_C");
    GeometryDerived d{};
    d.w0 = std::sqrt(g.wavelength * std::sqrt(g.length * (2.0 * g.mirror_roc - g.length)) / kTwoPi);
    d.fsr = c / (2.0 * g.length);
    d.g_param = 1.0 - g.length / g.mirror_roc;
    d.g_param_abs = std::abs(d.g_param);
    d.a_eff = kPi * d.w0 * d.w0 / 4.0;
    d.sigma = 3.0 * g.wavelength * g.wavelength / kTwoPi;
    d.a_tilde = d.a_eff / d.sigma;
    return d;
}

void validate(const MirrorSet& m) {
    auto check = [](double v, const char* key) {
        if (!(v >= 0 && v < 1))
            throw ValidationError(std::string("cavity.") + key + " must lie in [0, 1e6) ppm");
    };
    check(m.t1, "t1_ppm");
    check(m.t2, "t2_ppm");
    check(m.scatter_absorb, "scatter_absorb_ppm");
}

CavityRates derive_rates(const CavityGeometry& g, const MirrorSet& m, double c) {
    validate(m);
    const double loss = m.t2 + m.alpha_loss();
    if (!(loss > 0)) throw ValidationError("cavity total loss must be > 0");
    const double unit = c / (4.0 * g.length);
    CavityRates r{};
    r.kappa_ext = unit * m.t2;
    r.kappa_in = unit * m.alpha_loss();
    r.kappa = r.kappa_ext + r.kappa_in;
    r.total_loss = loss;
    r.finesse = kTwoPi / loss;
    r.ringdown = r.finesse / kPi * g.length / c;
    return r;
}

CavityModel make_cavity(const CavityGeometry& g, const MirrorSet& m, double c) {
    CavityModel cav;
    cav.geometry = g;
    cav.mirrors = m;
    cav.c = c;
    cav.geo = derive_geometry(g, c);
    cav.rates = derive_rates(g, m, c);
    return cav;
}

CavityModel default_cavity() {
    return make_cavity({19.906e-3, 9.984e-3, 854e-9}, {2.9e-6, 90e-6, 23.1e-6}, kSpeedOfLight);
}

double coupling_strength(double gamma_g, double length, double a_tilde, double zeta, int n_ions,
                         double c) {
    if (!(gamma_g > 0 && length > 0 && a_tilde > 0 && n_ions > 0))
        throw ValidationError("coupling_strength inputs must be positive");
    if (!(zeta > 0 && zeta <= 1)) throw ValidationError("zeta must lie in (0,1]");
    return zeta * std::sqrt(static_cast<double>(n_ions)) *
           std::sqrt(c * gamma_g / (2.0 * length * a_tilde));
}

double cooperativity(double g, double kappa, double gamma) {
    if (!(kappa > 0 && gamma > 0)) throw ValidationError("cooperativity rates must be positive");
    return g * g / (2.0 * kappa * gamma);
}

double cooperativity_mode_area(double zeta, int n_ions, double gamma_g, double gamma,
                               double a_tilde, double total_loss) {
    return zeta * zeta * n_ions * gamma_g / (gamma * a_tilde * total_loss);
}

CouplingContext make_coupling(const CavityModel& cav, const SchemeRates& s, double gamma,
                              int n_ions) {
    CouplingContext ctx{};
    ctx.zeta = s.zeta;
    ctx.n_ions = n_ions;
    ctx.g = coupling_strength(s.gamma_g, cav.geometry.length, cav.geo.a_tilde, s.zeta, n_ions, cav.c);
    ctx.c = cooperativity(ctx.g, cav.rates.kappa, gamma);
    ctx.c_mode_area = cooperativity_mode_area(s.zeta, n_ions, s.gamma_g, gamma, cav.geo.a_tilde,
                                              cav.rates.total_loss);
    if (std::abs(ctx.c - ctx.c_mode_area) > 1e-6 * std::abs(ctx.c))
        throw IntegrityError("cooperativity forms disagree");
    ctx.c_in = ctx.c * cav.rates.total_loss / cav.mirrors.alpha_loss();
    return ctx;
}

}  // namespace cpk
