#include <doctest.h>

#include <cmath>
#include <random>

#include "cpk/analysis.hpp"
#include "cpk/errors.hpp"

using namespace cpk;

namespace {

TimeTagSet uniform_tags(long long attempts, long long detections, double span, std::uint64_t seed) {
    TimeTagSet s;
    s.attempts = attempts;
    s.span_start_us = 0;
    s.span_end_us = span;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, span);
    for (long long i = 0; i < detections; ++i) s.tags.push_back({i, u(rng), 0, "V"});
    return s;
}

double integral(const Wavepacket& wp) {
    double s = 0;
    for (double p : wp.p_d) s += p * wp.dt_us;
    return s;
}

TrainStats exact_powers(double p, int n) {
    TrainStats s;
    s.n_slots = n;
    s.attempts = 1000000;
    for (int k = 1; k <= n; ++k) {
        s.p_slot.push_back(p);
        s.p_consec.push_back(std::pow(p, k));
        s.n_consec.push_back(static_cast<long long>(std::llround(std::pow(p, k) * s.attempts)));
    }
    return s;
}

}  // namespace

TEST_CASE("wavepacket normalisation") {
    const auto tags = uniform_tags(50000, 24358, 120, 1);
    const auto wp = bin_timetags(tags, 1.2);
    CHECK(integral(wp) == doctest::Approx(24358.0 / 50000).epsilon(1e-12));
    CHECK(integral(wp) == doctest::Approx(0.487).epsilon(0.001));
    for (double p : wp.p_d) CHECK(p >= 0);
    // refinement conserves the integral
    CHECK(integral(bin_timetags(tags, 0.3)) == doctest::Approx(integral(wp)).epsilon(1e-12));
    CHECK(integral(bin_timetags(tags, 7.0)) == doctest::Approx(integral(wp)).epsilon(1e-12));
}

TEST_CASE("single event and bin scaling") {
    TimeTagSet one;
    one.attempts = 1;
    one.span_start_us = 0;
    one.span_end_us = 1;
    one.tags.push_back({0, 0.5, 0, ""});
    const auto wp = bin_timetags(one, 1.0);
    REQUIRE(wp.p_d.size() == 1);
    CHECK(wp.p_d[0] == doctest::Approx(1.0));

    // evenly spaced events -> uniform density; doubling dt halves per-bin counts
    TimeTagSet u;
    u.attempts = 1000;
    u.span_start_us = 0;
    u.span_end_us = 100;
    for (int i = 0; i < 1000; ++i) u.tags.push_back({i, 0.05 + 0.1 * i, 0, ""});
    const auto a = bin_timetags(u, 1.0), b = bin_timetags(u, 2.0);
    CHECK(*std::max_element(a.p_d.begin(), a.p_d.end()) == doctest::Approx(0.01));
    CHECK(*std::max_element(b.p_d.begin(), b.p_d.end()) == doctest::Approx(0.01));
    CHECK(a.p_d[0] * a.dt_us * 2 == doctest::Approx(b.p_d[0] * b.dt_us));
}

TEST_CASE("earliest detection wins within an attempt") {
    TimeTagSet s;
    s.attempts = 2;
    s.tags = {{0, 5.0, 1, "H"}, {0, 2.0, 0, "V"}, {1, 3.0, 0, "V"}};
    const auto f = first_per_attempt(s.tags, 0, 0);
    REQUIRE(f.size() == 2);
    CHECK(f[0].t_us == 2.0);
    CHECK(f[0].pol == "V");
    CHECK(bin_timetags(s, 1.0).detections == 2);
}

TEST_CASE("empty input gives an empty wavepacket") {
    TimeTagSet s;
    s.attempts = 10;
    const auto wp = bin_timetags(s, 1.0);
    CHECK(wp.empty);
    CHECK(integral(wp) == 0.0);
}

TEST_CASE("tag validation") {
    TimeTagSet s;
    s.attempts = 2;
    s.tags = {{2, 1.0, 0, ""}};
    CHECK_THROWS_AS(bin_timetags(s, 1.0), ValidationError);
    s.tags = {{0, 1.0, 0, ""}};
    CHECK_THROWS_AS(bin_timetags(s, 0.0), ValidationError);
    s.span_start_us = 0;
    s.span_end_us = 0.5;
    CHECK_THROWS_AS(bin_timetags(s, 0.1), ValidationError);
}

TEST_CASE("efficiency integration") {
    Wavepacket wp;
    wp.edges_us = {0, 1};
    wp.p_d = {0.490};
    wp.p_d_err = {0.001};
    wp.dt_us = 1;
    wp.attempts = 100000;
    wp.detections = 49000;
    wp.empty = false;
    PathEfficiency path;
    CHECK(path.value() == doctest::Approx(0.97 * 0.81 * 0.87).epsilon(1e-14));
    CHECK(path.value() == doctest::Approx(0.68).epsilon(0.005));
    const auto e = integrate_efficiency(wp, path);
    CHECK(e.p_tot == doctest::Approx(0.490));
    CHECK(e.p_s == doctest::Approx(0.72).epsilon(0.005 / 0.72));
    CHECK(e.p_s_err == doctest::Approx(0.03).epsilon(0.35));

    PathEfficiency unit{1, 0, 1, 0, 1, 0};
    CHECK(integrate_efficiency(wp, unit).p_s == doctest::Approx(0.490));

    wp.p_d = {0.462};
    const auto ent = integrate_efficiency(wp, entanglement_path(path));
    CHECK(entanglement_path(path).value() == doctest::Approx(path.value() * 0.96 / 0.97).epsilon(1e-12));
    CHECK(ent.p_s == doctest::Approx(0.69).epsilon(0.005 / 0.69));

    wp.p_d = {0.9};
    CHECK_THROWS_AS(integrate_efficiency(wp, path), ValidationError);
}

TEST_CASE("Poisson error on P_tot scales as sqrt(N)/k") {
    const auto tags = uniform_tags(40000, 10000, 100, 2);
    const auto wp = bin_timetags(tags, 1.0);
    const auto e = integrate_efficiency(wp, PathEfficiency{1, 0, 1, 0, 1, 0});
    CHECK(e.p_tot_err == doctest::Approx(std::sqrt(10000.0) / 40000).epsilon(1e-9));
}

TEST_CASE("train statistics on Bernoulli slots") {
    const auto tags = synthetic_train(30000, 15, 0.474, 0.0, 17);
    const auto s = train_statistics(tags);
    REQUIRE(s.p_consec.size() == 15);
    for (int n = 1; n < 15; ++n) CHECK(s.p_consec[n] <= s.p_consec[n - 1]);
    for (int n = 1; n <= 4; ++n) {
        const double p = std::pow(0.474, n);
        const double sigma = std::sqrt(p * (1 - p) / 30000);
        CHECK(std::abs(s.p_consec[n - 1] - p) < 3 * sigma);
    }
    const auto fit = fit_geometric(s);
    CHECK(fit.p == doctest::Approx(0.474).epsilon(0.006 / 0.474));
    CHECK(fit.stderr_p < 0.006);
    CHECK_FALSE(fit.non_geometric);
}

TEST_CASE("empty train and overlapping windows") {
    TimeTagSet s;
    s.attempts = 100;
    s.windows = slot_windows(15, 200, 60);
    const auto st = train_statistics(s);
    for (double p : st.p_consec) CHECK(p == 0.0);
    s.windows = {{0, 10}, {5, 20}};
    CHECK_THROWS_AS(train_statistics(s), ValidationError);
}

TEST_CASE("geometric fit") {
    const auto fit = fit_geometric(exact_powers(0.5, 15));
    CHECK(fit.p == doctest::Approx(0.5).epsilon(1e-6));
    TrainStats one = exact_powers(0.5, 1);
    CHECK_THROWS_AS(fit_geometric(one), InsufficientDataError);
}

TEST_CASE("correlated slots are flagged") {
    const auto tags = synthetic_train(30000, 15, 0.6, 0.01, 23);
    CHECK(fit_geometric(train_statistics(tags)).non_geometric);
}

TEST_CASE("fit covers the slot mean in most seeded trials") {
    int covered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = train_statistics(synthetic_train(5000, 15, 0.474, 0.0, 1000 + trial));
        double mean = 0;
        for (double p : s.p_slot) mean += p / s.p_slot.size();
        const auto f = fit_geometric(s);
        if (std::abs(f.p - mean) < 2 * f.stderr_p) ++covered;
    }
    CHECK(covered >= 95);
}

TEST_CASE("background rate outside the pulse") {
    TimeTagSet s;
    s.attempts = 1000;
    for (int i = 0; i < 12; ++i) s.tags.push_back({i, 300.0 + i, 0, ""});
    // 12 counts over 1000 attempts x 60 us
    CHECK(background_rate(s, 300, 360) == doctest::Approx(12 / (1000 * 60e-6)).epsilon(1e-12));
}
