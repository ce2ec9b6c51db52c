#pragma once

#include "cpk/atomic.hpp"

namespace cpk {

struct CavityGeometry {
    double length;       // m
    double mirror_roc;   // m
    double wavelength;   // m
};

// Fractions, not ppm.
struct MirrorSet {
    double t1;
    double t2;
    double scatter_absorb;
    double alpha_loss() const { return scatter_absorb + t1; }
};

struct GeometryDerived {
    double w0;
    double fsr;            // Hz
    double g_param;        // 1 - l/R_C, signed
    double g_param_abs;
    double a_eff;          // m^2
    double sigma;          // m^2, 3 lambda^2 / 2 pi
    double a_tilde;
};

struct CavityRates {
    double kappa;
    double kappa_in;
    double kappa_ext;
    double finesse;
    double total_loss;
    double ringdown;       // s
};

struct CavityModel {
    CavityGeometry geometry;
    MirrorSet mirrors;
    GeometryDerived geo;
    CavityRates rates;
    double c = 299792458.0;
};

struct CouplingContext {
    double g;
    double zeta;
    int n_ions;
    double c;
    double c_mode_area;
    double c_in;
};

GeometryDerived derive_geometry(const CavityGeometry& g, double c);
CavityRates derive_rates(const CavityGeometry& g, const MirrorSet& m, double c);
void validate(const MirrorSet& m);
CavityModel make_cavity(const CavityGeometry& g, const MirrorSet& m, double c);
CavityModel default_cavity();

double coupling_strength(double gamma_g, double length, double a_tilde, double zeta, int n_ions,
                         double c);
double cooperativity(double g, double kappa, double gamma);
double cooperativity_mode_area(double zeta, int n_ions, double gamma_g, double gamma,
                               double a_tilde, double total_loss);

// Both cooperativity forms, cross-checked. Throws IntegrityError on disagreement.
CouplingContext make_coupling(const CavityModel& cav, const SchemeRates& s, double gamma,
                              int n_ions);

}  // namespace cpk
