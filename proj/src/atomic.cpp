#include "cpk/atomic.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

namespace cpk {

namespace {

double factorial(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(40, 1.0);
        for (int i = 1; i < 40; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    if (n < 0 || n >= static_cast<int>(table.size())) throw std::out_of_range("factorial");
    return table[n];
}

bool valid_m(const LevelManifold& mf, int two_m) {
    return std::abs(two_m) <= mf.two_j && (two_m + mf.two_j) % 2 == 0;
}

}  // namespace

double lande_formula(int two_j, int two_l, int two_s) {
    const double j = two_j / 2.0, l = two_l / 2.0, s = two_s / 2.0;
    return 1.0 + (j * (j + 1) + s * (s + 1) - l * (l + 1)) / (2.0 * j * (j + 1));
}

std::string term_label(Term term) {
    switch (term) {
        case Term::S12: return "S1/2";
        case Term::P12: return "P1/2";
        case Term::P32: return "P3/2";
        case Term::D32: return "D3/2";
        case Term::D52: return "D5/2";
    }
    return "?";
}

LevelManifold make_manifold(Term term) {
    int two_j = 1, two_l = 0;
    switch (term) {
        case Term::S12: two_j = 1; two_l = 0; break;
        case Term::P12: two_j = 1; two_l = 2; break;
        case Term::P32: two_j = 3; two_l = 2; break;
        case Term::D32: two_j = 3; two_l = 4; break;
        case Term::D52: two_j = 5; two_l = 4; break;
    }
    LevelManifold mf{term, term_label(term), two_j, two_l, 1, lande_formula(two_j, two_l, 1), {}};
    for (int m = -two_j; m <= two_j; m += 2) mf.two_m.push_back(m);
    return mf;
}

const LevelManifold& manifold(const EmitterModel& em, Term term) {
    for (const auto& mf : em.manifolds)
        if (mf.term == term) return mf;
    throw ValidationError("emitter has no " + term_label(term) + " manifold");
}

EmitterModel default_emitter() {
    EmitterModel em;
    for (Term t : {Term::S12, Term::P12, Term::P32, Term::D32, Term::D52})
        em.manifolds.push_back(make_manifold(t));
    em.gamma_total = mhz_to_rad(11.49);
    em.branching = {0.9347, 0.00661, 0.0587};
    em.b_field_gauss = 4.23;
    em.mu_b_mhz_per_gauss = kBohrMagnetonMHzPerGauss;
    return em;
}

void validate(const EmitterModel& em) {
    if (!(em.gamma_total > 0)) throw ValidationError("emitter.gamma_total_mhz must be > 0");
    for (double r : em.branching)
        if (!(r >= 0 && r <= 1)) throw ValidationError("emitter.branching entries must lie in [0,1]");
    const double sum = std::accumulate(em.branching.begin(), em.branching.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-3)
        throw ValidationError("emitter.branching must sum to 1 within 1e-3");
    if (!(em.b_field_gauss >= 0)) throw ValidationError("emitter.b_field_gauss must be >= 0");
    if (!(em.mu_b_mhz_per_gauss > 0)) throw ValidationError("emitter.mu_b_mhz_per_gauss must be > 0");
    int count = 0;
    for (const auto& mf : em.manifolds) count += static_cast<int>(mf.two_m.size());
    if (count != 18) throw ValidationError("emitter must contain 18 sublevels");
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
    if (two_m1 + two_m2 != two_M) return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_M) > two_J) return 0.0;
    if (two_J < std::abs(two_j1 - two_j2) || two_J > two_j1 + two_j2) return 0.0;
    if ((two_j1 + two_j2 + two_J) % 2 != 0) return 0.0;
    if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_J + two_M) % 2 != 0) return 0.0;

    const int a = (two_j1 + two_j2 - two_J) / 2;
    const int b = (two_j1 - two_m1) / 2;
    const int c = (two_j2 + two_m2) / 2;
    const int d = (two_J - two_j2 + two_m1) / 2;
    const int e = (two_J - two_j1 - two_m2) / 2;

    double pre = (two_J + 1) * factorial((two_J + two_j1 - two_j2) / 2) *
                 factorial((two_J - two_j1 + two_j2) / 2) * factorial(a) /
                 factorial((two_j1 + two_j2 + two_J) / 2 + 1);
    pre *= factorial((two_J + two_M) / 2) * factorial((two_J - two_M) / 2) *
           factorial((two_j1 - two_m1) / 2) * factorial((two_j1 + two_m1) / 2) *
           factorial((two_j2 - two_m2) / 2) * factorial((two_j2 + two_m2) / 2);

    double sum = 0.0;
    for (int k = std::max({0, -d, -e}); k <= std::min({a, b, c}); ++k) {
        const double den = factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k) *
                           factorial(d + k) * factorial(e + k);
        sum += (k % 2 ? -1.0 : 1.0) / den;
    }
    return std::sqrt(pre) * sum;
}

double dipole_cg(const EmitterModel& em, Term lower, int two_m_lower, int two_m_upper) {
    const auto& lo = manifold(em, lower);
    const int two_q = two_m_upper - two_m_lower;
    if (std::abs(two_q) > 2) return 0.0;
    return clebsch_gordan(lo.two_j, two_m_lower, 2, two_q, 3, two_m_upper);
}

double branching_of(const EmitterModel& em, Term lower) {
    const double sum = em.branching[0] + em.branching[1] + em.branching[2];
    switch (lower) {
        case Term::S12: return em.branching[0] / sum;
        case Term::D32: return em.branching[1] / sum;
        case Term::D52: return em.branching[2] / sum;
        default: return 0.0;
    }
}

std::vector<DecayChannel> decay_channel_table(const EmitterModel& em) {
    std::vector<DecayChannel> out;
    const auto& up = manifold(em, Term::P32);
    for (int two_mu : up.two_m) {
        for (Term lower : {Term::S12, Term::D32, Term::D52}) {
            const auto& lo = manifold(em, lower);
            for (int two_ml : lo.two_m) {
                const double cg = dipole_cg(em, lower, two_ml, two_mu);
                if (cg == 0.0) continue;
                out.push_back({{Term::P32, two_mu}, {lower, two_ml}, (two_mu - two_ml) / 2, cg,
                               em.gamma_total * branching_of(em, lower) * cg * cg});
            }
        }
    }
    return out;
}

SchemeRates scheme_rates(const EmitterModel& em, int two_m_upper, int two_m_lower,
                         Sublevel initial, double zeta) {
    const auto& up = manifold(em, Term::P32);
    const auto& d52 = manifold(em, Term::D52);
    if (!valid_m(up, two_m_upper) || !valid_m(d52, two_m_lower))
        throw ValidationError("cavity transition sublevel out of range");
    if (std::abs(two_m_upper - two_m_lower) > 2)
        throw ValidationError("cavity transition is dipole-forbidden (|dm| > 1)");
    if (initial.term != Term::S12 || !valid_m(manifold(em, Term::S12), initial.two_m))
        throw ValidationError("initial state must be an S1/2 sublevel");
    if (!(zeta > 0 && zeta <= 1)) throw ValidationError("zeta must lie in (0,1]");

    SchemeRates r{};
    const double cg_g = dipole_cg(em, Term::D52, two_m_lower, two_m_upper);
    const double cg_u = dipole_cg(em, Term::S12, initial.two_m, two_m_upper);
    r.gamma_g = em.gamma_total * branching_of(em, Term::D52) * cg_g * cg_g;
    r.gamma_u = em.gamma_total * branching_of(em, Term::S12) * cg_u * cg_u;
    r.gamma_o = em.gamma_total - r.gamma_g - r.gamma_u;
    r.r_u = r.gamma_u / em.gamma_total;
    r.zeta = zeta;
    return r;
}

SchemeRates v_scheme_rates(const EmitterModel& em, double zeta) {
    return scheme_rates(em, -3, -5, {Term::S12, -1}, zeta);
}

double zeeman_splitting(const EmitterModel& em, Term term, int two_m_a, int two_m_b) {
    const auto& mf = manifold(em, term);
    if (!valid_m(mf, two_m_a) || !valid_m(mf, two_m_b))
        throw ValidationError("sublevel outside -J..J for " + mf.label);
    return std::abs(two_m_a - two_m_b) / 2.0 * mf.lande_g * mhz_to_rad(em.mu_b_mhz_per_gauss) *
           em.b_field_gauss;
}

double zeeman_energy(const EmitterModel& em, Sublevel s) {
    const auto& mf = manifold(em, s.term);
    return s.two_m / 2.0 * mf.lande_g * mhz_to_rad(em.mu_b_mhz_per_gauss) * em.b_field_gauss;
}

RabiScaling motional_rabi_scaling(double omega, double eta, int n) {
    const double eta2 = eta * eta;
    const double measure = eta2 * (2.0 * n + 1.0);
    return {omega * (1.0 - eta2 * n), measure <= 0.3, measure};
}

}  // namespace cpk
