#pragma once

#include <array>
#include <string>
#include <vector>

namespace cpk {

enum class Term { S12, P12, P32, D32, D52 };

// Angular momenta are stored doubled so half-integers stay integral.
struct LevelManifold {
    Term term;
    std::string label;
    int two_j;
    int two_l;
    int two_s;
    double lande_g;
    std::vector<int> two_m;  // -J..J
};

struct Sublevel {
    Term term;
    int two_m;
    bool operator==(const Sublevel&) const = default;
};

struct DecayChannel {
    Sublevel upper;
    Sublevel lower;
    int q;          // m_upper - m_lower
    double cg;      // signed Clebsch-Gordan coefficient <J_l m_l; 1 q | 3/2 m_u>
    double rate;    // rad/s
};

struct EmitterModel {
    std::vector<LevelManifold> manifolds;
    double gamma_total;                // rad/s, P3/2 decay rate (half-width convention, see cmrt)
    std::array<double, 3> branching;   // S1/2, D3/2, D5/2
    double b_field_gauss;
    double mu_b_mhz_per_gauss;
};

struct SchemeRates {
    double gamma_g;
    double gamma_u;
    double gamma_o;
    double r_u;
    double zeta;
};

struct RabiScaling {
    double omega;
    bool in_regime;
    double lamb_dicke_measure;  // eta^2 (2n+1)
};

double lande_formula(int two_j, int two_l, int two_s);
LevelManifold make_manifold(Term term);
const LevelManifold& manifold(const EmitterModel& em, Term term);
std::string term_label(Term term);

EmitterModel default_emitter();
void validate(const EmitterModel& em);

// <j1 m1; j2 m2 | J M>, all arguments doubled.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M);

// Dipole coefficient for P3/2(m_u) -> lower(m_l). Zero when forbidden.
double dipole_cg(const EmitterModel& em, Term lower, int two_m_lower, int two_m_upper);

double branching_of(const EmitterModel& em, Term lower);

std::vector<DecayChannel> decay_channel_table(const EmitterModel& em);

SchemeRates scheme_rates(const EmitterModel& em, int two_m_upper, int two_m_lower,
                         Sublevel initial, double zeta);

// V-photon scheme: P3/2(-3/2) -> D5/2(-5/2), start in S1/2(-1/2).
SchemeRates v_scheme_rates(const EmitterModel& em, double zeta);

double zeeman_splitting(const EmitterModel& em, Term term, int two_m_a, int two_m_b);

// Linear Zeeman energy of a sublevel relative to the manifold centre, rad/s.
double zeeman_energy(const EmitterModel& em, Sublevel s);

RabiScaling motional_rabi_scaling(double omega, double eta, int n);

}  // namespace cpk
