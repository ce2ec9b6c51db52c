#include <doctest.h>

#include <cmath>

#include "cpk/errors.hpp"
#include "cpk/ode.hpp"

using namespace cpk;

TEST_CASE("complex exponential decay") {
    const std::complex<double> lam(-1.0, 5.0);
    CVec y(1);
    y(0) = 1.0;
    OdeStats st;
    dopri5([&](double, const CVec& v, CVec& d) { d = lam * v; }, 0, 2, y, OdeOptions{}, &st);
    CHECK(std::abs(y(0) - std::exp(lam * 2.0)) < 1e-7);
    CHECK(st.accepted > 0);
    CHECK(st.last_h > 0);
}

TEST_CASE("continuation matches a single run") {
    auto f = [](double t, const CVec& v, CVec& d) { d = -std::cos(t) * v; };
    CVec a(1), b(1);
    a(0) = b(0) = 1.0;
    OdeOptions opt;
    dopri5(f, 0, 3, a, opt);
    OdeStats st;
    dopri5(f, 0, 1.5, b, opt, &st);
    opt.h_init = st.last_h;
    dopri5(f, 1.5, 3, b, opt);
    CHECK(std::abs(a(0) - std::exp(-std::sin(3.0))) < 1e-7);
    CHECK(std::abs(b(0) - a(0)) < 1e-7);
}

TEST_CASE("blow-up reports the failure time") {
    CVec y(1);
    y(0) = 1.0;
    OdeOptions opt;
    try {
        dopri5([](double, const CVec& v, CVec& d) { d = v.cwiseProduct(v); }, 0, 2, y, opt);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.time() == doctest::Approx(1.0).epsilon(0.01));
    }
}
