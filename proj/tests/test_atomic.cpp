#include <doctest.h>

#include <cmath>

#include "cpk/atomic.hpp"
#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

using namespace cpk;

namespace {

double mhz(double w) { return rad_to_mhz(w); }

}  // namespace

TEST_CASE("manifolds: sublevel counts and Lande factors") {
    const auto em = default_emitter();
    int total = 0;
    for (const auto& m : em.manifolds) {
        CHECK(static_cast<int>(m.two_m.size()) == m.two_j + 1);
        total += static_cast<int>(m.two_m.size());
    }
    CHECK(total == 18);
    // textbook LS-coupling values
    CHECK(manifold(em, Term::S12).lande_g == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(manifold(em, Term::P12).lande_g == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(manifold(em, Term::P32).lande_g == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(manifold(em, Term::D32).lande_g == doctest::Approx(4.0 / 5.0).epsilon(1e-12));
    CHECK(manifold(em, Term::D52).lande_g == doctest::Approx(6.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("defaults: branching and linewidth") {
    const auto em = default_emitter();
    CHECK(std::abs(em.branching[0] + em.branching[1] + em.branching[2] - 1.0) < 1e-3);
    CHECK(mhz(em.gamma_total) == doctest::Approx(11.49).epsilon(1e-9));
    CHECK(em.b_field_gauss == 4.23);
}

TEST_CASE("Clebsch-Gordan weights into D5/2 from P3/2(-3/2)") {
    const auto em = default_emitter();
    CHECK(std::pow(dipole_cg(em, Term::D52, -5, -3), 2) == doctest::Approx(10.0 / 15.0).epsilon(1e-12));
    CHECK(std::pow(dipole_cg(em, Term::D52, -3, -3), 2) == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
    CHECK(std::pow(dipole_cg(em, Term::D52, -1, -3), 2) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
    CHECK(dipole_cg(em, Term::D52, 1, -3) == 0.0);
    // sigma decay to S1/2(-1/2) is the only S channel from the stretched state
    CHECK(std::pow(dipole_cg(em, Term::S12, -1, -3), 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Clebsch-Gordan completeness for every P3/2 sublevel") {
    const auto em = default_emitter();
    for (int mu : {-3, -1, 1, 3}) {
        for (Term lower : {Term::S12, Term::D32, Term::D52}) {
            double sum = 0;
            for (int ml : manifold(em, lower).two_m) sum += std::pow(dipole_cg(em, lower, ml, mu), 2);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("decay table: selection rules and total rate") {
    const auto em = default_emitter();
    const auto table = decay_channel_table(em);
    for (int mu : {-3, -1, 1, 3}) {
        double total = 0;
        for (const auto& ch : table) {
            if (ch.upper.two_m != mu) continue;
            CHECK(ch.upper.term == Term::P32);
            CHECK(std::abs(ch.q) <= 1);
            CHECK(2 * ch.q == ch.upper.two_m - ch.lower.two_m);
            total += ch.rate;
        }
        CHECK(total == doctest::Approx(em.gamma_total).epsilon(1e-12));
    }
    bool found = false;
    for (const auto& ch : table) {
        if (ch.upper == Sublevel{Term::P32, -3} && ch.lower == Sublevel{Term::D52, -5}) {
            found = true;
            CHECK(mhz(ch.rate) == doctest::Approx(0.45).epsilon(0.01));
        }
    }
    CHECK(found);
}

TEST_CASE("scheme rates: V and H photons") {
    const auto em = default_emitter();
    const auto v = v_scheme_rates(em, std::sqrt(0.5));
    CHECK(mhz(v.gamma_g) == doctest::Approx(0.45).epsilon(0.005 / 0.45));
    CHECK(mhz(v.gamma_u) == doctest::Approx(10.74).epsilon(0.005 / 10.74));
    CHECK(mhz(v.gamma_o) == doctest::Approx(0.30).epsilon(0.005 / 0.30));
    CHECK((v.gamma_g + v.gamma_u + v.gamma_o) == doctest::Approx(em.gamma_total).epsilon(1e-12));
    CHECK(v.r_u > 0);
    CHECK(v.r_u < 1);

    // H photon: Delta m = 0 into D5/2(-3/2); oracle 11.49 * r_D52 * 4/15
    const auto h = scheme_rates(em, -3, -3, {Term::S12, -1}, 1.0);
    const double r_d52 = 0.0587 / (0.9347 + 0.00661 + 0.0587);
    CHECK(mhz(h.gamma_g) == doctest::Approx(11.49 * r_d52 * 4.0 / 15.0).epsilon(1e-9));
    CHECK(mhz(h.gamma_g) == doctest::Approx(0.180).epsilon(0.01));
}

TEST_CASE("scheme rates: invalid inputs") {
    const auto em = default_emitter();
    CHECK_THROWS_AS(scheme_rates(em, -3, 1, {Term::S12, -1}, 1.0), ValidationError);
    CHECK_THROWS_AS(scheme_rates(em, -3, -5, {Term::D52, -1}, 1.0), ValidationError);
    CHECK_THROWS_AS(scheme_rates(em, -3, -5, {Term::S12, -1}, 0.0), ValidationError);
}

TEST_CASE("Zeeman splittings") {
    const auto em = default_emitter();
    CHECK(mhz(zeeman_splitting(em, Term::D52, -5, -3)) == doctest::Approx(1.2 * 1.39962 * 4.23).epsilon(1e-12));
    CHECK(mhz(zeeman_splitting(em, Term::D52, -5, -3)) == doctest::Approx(7.10).epsilon(0.01 / 7.1));
    CHECK(zeeman_splitting(em, Term::D52, -1, -1) == 0.0);
    CHECK(mhz(zeeman_splitting(em, Term::S12, -1, 1)) == doctest::Approx(11.84).epsilon(0.01 / 11.84));
    CHECK_THROWS_AS(zeeman_splitting(em, Term::S12, -1, 3), ValidationError);
}

TEST_CASE("motional Rabi scaling") {
    const double w = 1.0;
    auto r0 = motional_rabi_scaling(w, 0.13, 0);
    CHECK(r0.omega == w);
    CHECK(r0.in_regime);
    auto r11 = motional_rabi_scaling(w, 0.13, 11);
    CHECK(r11.omega == doctest::Approx(1 - 0.0169 * 11).epsilon(1e-12));
    CHECK(r11.omega == doctest::Approx(0.814).epsilon(0.001));
    auto r30 = motional_rabi_scaling(w, 0.13, 30);
    CHECK_FALSE(r30.in_regime);
    CHECK(r30.lamb_dicke_measure == doctest::Approx(1.03).epsilon(0.01));
}

TEST_CASE("emitter validation") {
    auto em = default_emitter();
    em.branching = {0.5, 0.1, 0.1};
    CHECK_THROWS_AS(validate(em), ValidationError);
    em = default_emitter();
    em.gamma_total = -1;
    CHECK_THROWS_AS(validate(em), ValidationError);
}
