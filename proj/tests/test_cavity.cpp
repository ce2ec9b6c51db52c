#include <doctest.h>

#include <cmath>

#include "cpk/atomic.hpp"
#include "cpk/cavity.hpp"
#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

using namespace cpk;

namespace {

constexpr double kL = 19.906e-3, kR = 9.984e-3, kLambda = 854e-9;

double waist_oracle(double l, double r, double lambda) {
    return std::sqrt(lambda * std::sqrt(l * (2 * r - l)) / (2 * kPi));
}

}  // namespace

TEST_CASE("geometry of the default cavity") {
    const auto g = derive_geometry({kL, kR, kLambda}, kSpeedOfLight);
    CHECK(g.w0 == doctest::Approx(waist_oracle(kL, kR, kLambda)).epsilon(1e-12));
    CHECK(g.w0 * 1e6 == doctest::Approx(12.3).epsilon(0.1 / 12.3));
    CHECK(g.fsr / 1e6 == doctest::Approx(7530).epsilon(1.0 / 7530));
    CHECK(g.g_param == doctest::Approx(1 - kL / kR).epsilon(1e-12));
    CHECK(g.g_param_abs == doctest::Approx(0.994).epsilon(0.002));
    const double sigma = 3 * kLambda * kLambda / (2 * kPi);
    CHECK(g.sigma * 1e12 == doctest::Approx(0.3482).epsilon(1e-3));
    const double area = kPi * g.w0 * g.w0 / 4;
    CHECK(g.a_tilde == doctest::Approx(area / sigma).epsilon(1e-12));
    // 341.8 follows from the rounded 12.31 um waist; the exact waist gives ~340.6
    CHECK(g.a_tilde == doctest::Approx(341.8).epsilon(1.5 / 341.8));
}

TEST_CASE("geometry edge cases") {
    CHECK(derive_geometry({kR, kR, kLambda}, kSpeedOfLight).g_param == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(derive_geometry({2 * kR, kR, kLambda}, kSpeedOfLight), ValidationError);
    CHECK_THROWS_AS(derive_geometry({-1e-3, kR, kLambda}, kSpeedOfLight), ValidationError);
    // waist shrinks towards the concentric limit
    double prev = 1e9;
    for (double l = 1.2 * kR; l < 1.999 * kR; l += 0.05 * kR) {
        const double w = derive_geometry({l, kR, kLambda}, kSpeedOfLight).w0;
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("rates of the default cavity") {
    const auto cav = default_cavity();
    CHECK(cav.mirrors.alpha_loss() == doctest::Approx(26e-6).epsilon(1e-12));
    const double unit = kSpeedOfLight / (4 * kL);
    CHECK(cav.rates.kappa == doctest::Approx(unit * 116e-6).epsilon(1e-12));
    CHECK(cav.rates.kappa_ext == doctest::Approx(unit * 90e-6).epsilon(1e-12));
    CHECK(cav.rates.kappa_in == doctest::Approx(unit * 26e-6).epsilon(1e-12));
    CHECK(cav.rates.kappa == doctest::Approx(cav.rates.kappa_in + cav.rates.kappa_ext).epsilon(1e-14));
    CHECK(cav.rates.kappa / (kTwoPi * 1e3) == doctest::Approx(70).epsilon(1.0 / 70));
    CHECK(cav.rates.finesse == doctest::Approx(kTwoPi / 116e-6).epsilon(1e-12));
    CHECK(cav.rates.finesse / 1e3 == doctest::Approx(54).epsilon(1.0 / 54));
    CHECK(cav.rates.ringdown * 1e6 == doctest::Approx(1.14).epsilon(0.01 / 1.14));
    CHECK(cav.rates.ringdown == doctest::Approx(1 / (2 * cav.rates.kappa)).epsilon(1e-12));
    CHECK(cav.rates.kappa_ext / cav.rates.kappa == doctest::Approx(90.0 / 116.0).epsilon(1e-14));
}

TEST_CASE("symmetric loss split") {
    const auto r = derive_rates({kL, kR, kLambda}, {10e-6, 30e-6, 20e-6}, kSpeedOfLight);
    CHECK(r.kappa_ext == doctest::Approx(r.kappa_in).epsilon(1e-14));
    CHECK_THROWS_AS(derive_rates({kL, kR, kLambda}, {0, 0, 0}, kSpeedOfLight), ValidationError);
    CHECK_THROWS_AS(validate(MirrorSet{-1e-6, 90e-6, 0}), ValidationError);
}

TEST_CASE("coupling strength") {
    const double gg = mhz_to_rad(0.45);
    const double g = coupling_strength(gg, kL, 341.8, std::sqrt(0.5), 1, kSpeedOfLight);
    CHECK(g == doctest::Approx(std::sqrt(0.5) * std::sqrt(kSpeedOfLight * gg / (2 * kL * 341.8))).epsilon(1e-12));
    CHECK(rad_to_mhz(g) == doctest::Approx(0.88).epsilon(0.01 / 0.88));
    const double g1 = coupling_strength(gg, kL, 341.8, 1.0, 1, kSpeedOfLight);
    CHECK(rad_to_mhz(g1) == doctest::Approx(1.25).epsilon(0.01 / 1.25));
    CHECK(coupling_strength(gg, kL, 341.8, 1.0, 4, kSpeedOfLight) == doctest::Approx(2 * g1).epsilon(1e-14));
}

TEST_CASE("cooperativity forms agree") {
    const auto em = default_emitter();
    const auto cav = default_cavity();
    const auto s = v_scheme_rates(em, std::sqrt(0.5));
    const auto ctx = make_coupling(cav, s, em.gamma_total, 1);
    CHECK(ctx.c == doctest::Approx(0.49).epsilon(0.01 / 0.49));
    CHECK(ctx.c == doctest::Approx(ctx.c_mode_area).epsilon(1e-9));
    CHECK(ctx.c_in == doctest::Approx(ctx.c * 116.0 / 26.0).epsilon(1e-12));
    CHECK(rad_to_mhz(ctx.g) == doctest::Approx(0.88).epsilon(0.01 / 0.88));

    auto s1 = v_scheme_rates(em, 1.0);
    CHECK(make_coupling(cav, s1, em.gamma_total, 1).c == doctest::Approx(2 * ctx.c).epsilon(1e-12));
    CHECK(make_coupling(cav, s, em.gamma_total, 3).c == doctest::Approx(3 * ctx.c).epsilon(1e-12));

    // printed-rate evaluation of g^2/(2 kappa gamma)
    const double c_printed = cooperativity(mhz_to_rad(0.88), kTwoPi * 70e3, mhz_to_rad(11.49));
    CHECK(c_printed == doctest::Approx(0.48).epsilon(0.01 / 0.48));
    CHECK(cooperativity_mode_area(std::sqrt(0.5), 1, 0.03916, 1.0, 341.8, 116e-6) ==
          doctest::Approx(0.49).epsilon(0.01 / 0.49));
}
