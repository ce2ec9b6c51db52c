#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"
#include "cpk/tomography.hpp"

using namespace cpk;
using cd = std::complex<double>;

namespace {

Mat4 random_state(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0, 1);
    std::uniform_int_distribution<int> rank(1, 4);
    const int r = rank(rng);
    Eigen::Matrix<cd, 4, Eigen::Dynamic> g(4, r);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < r; ++j) g(i, j) = cd(n(rng), n(rng));
    Mat4 rho = g * g.adjoint();
    return rho / rho.trace().real();
}

void check_physical(const Mat4& rho) {
    CHECK((rho - rho.adjoint()).norm() < 1e-10);
    CHECK(std::abs(rho.trace() - cd(1, 0)) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat4> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

// Direct state vector of (|g1 V> + e^{i theta}|g2 H>)/sqrt2 in the (g1V, g1H, g2V, g2H) basis.
Mat4 target_oracle(double theta) {
    Eigen::Vector4cd v(1, 0, 0, std::polar(1.0, theta));
    v /= std::sqrt(2.0);
    return v * v.adjoint();
}

}  // namespace

TEST_CASE("measurement set completeness and labels") {
    const auto set = measurement_set();
    REQUIRE(set.size() == 36);
    for (int b = 0; b < 9; ++b) {
        Mat4 sum = Mat4::Zero();
        for (int o = 0; o < 4; ++o) {
            const auto& p = projector(b, o);
            CHECK(p.photon_basis == static_cast<Pauli>(b / 3));
            CHECK(p.ion_basis == static_cast<Pauli>(b % 3));
            CHECK(p.outcome == outcome_label(o));
            CHECK(std::abs((p.op * p.op - p.op).norm()) < 1e-12);
            CHECK(std::abs(p.op.trace().real() - 1.0) < 1e-12);
            sum += p.op;
        }
        CHECK((sum - Mat4::Identity()).norm() < 1e-12);
    }
    // ZZ: "++" is photon V, ion g1 -> |g1 V>
    CHECK(std::abs(projector(0, outcome_index("++")).op(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(projector(0, outcome_index("-+")).op(1, 1) - 1.0) < 1e-12);
    CHECK(std::abs(projector(0, outcome_index("+-")).op(2, 2) - 1.0) < 1e-12);
    CHECK_THROWS_AS(outcome_index("+0"), ValidationError);
    CHECK_THROWS_AS(parse_pauli("W"), ValidationError);
    CHECK(parse_pauli("x") == Pauli::X);
}

TEST_CASE("Born probabilities of the target in ZZ") {
    const auto p = born_probabilities(target_state(0.0));
    // order (g1V, g1H, g2V, g2H) -> outcomes ++, -+, +-, --
    CHECK(p[0][outcome_index("++")] == doctest::Approx(0.5));
    CHECK(p[0][outcome_index("-+")] == doctest::Approx(0.0));
    CHECK(p[0][outcome_index("+-")] == doctest::Approx(0.0));
    CHECK(p[0][outcome_index("--")] == doctest::Approx(0.5));
    CHECK((target_state(0.91) - target_oracle(0.91)).norm() < 1e-14);
}

TEST_CASE("metrics of reference states") {
    const auto m = metrics(target_state(0.91));
    CHECK(m.fidelity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.purity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.theta == doctest::Approx(0.91).epsilon(1e-5));
    const auto mm = metrics(maximally_mixed());
    CHECK(mm.fidelity == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mm.purity == doctest::Approx(0.25).epsilon(1e-12));
    // theta wraps into [0, 2pi)
    const auto w = metrics(target_state(-0.5));
    CHECK(w.theta == doctest::Approx(kTwoPi - 0.5).epsilon(1e-6));
}

TEST_CASE("fidelity never exceeds sqrt(purity)") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const auto rho = random_state(rng);
        const auto m = metrics(rho);
        CHECK(m.fidelity <= std::sqrt(m.purity) + 1e-9);
        CHECK(m.fidelity >= 0);
        CHECK(m.purity >= 0.25 - 1e-12);
        CHECK(m.purity <= 1 + 1e-12);
        // fitted theta is a maximum: brute-force scan
        double best = 0;
        for (int k = 0; k < 720; ++k) best = std::max(best, fidelity(rho, k * kTwoPi / 720));
        CHECK(m.fidelity >= best - 1e-9);
    }
}

TEST_CASE("reconstruction round trip at high statistics") {
    const auto truth = target_state(0.91);
    const auto rec = reconstruct(expected_counts(truth, 1e6));
    check_physical(rec.rho);
    CHECK(fidelity(rec.rho, 0.91) > 0.999);

    std::mt19937_64 rng(5);
    const auto noisy = reconstruct(sample_counts(truth, 1000000, rng));
    check_physical(noisy.rho);
    CHECK(fidelity(noisy.rho, 0.91) > 0.999);
}

TEST_CASE("maximally mixed data reconstructs to I/4") {
    CountTable c;
    for (auto& row : c.counts) row = {250, 250, 250, 250};
    const auto rec = reconstruct(c);
    CHECK((rec.rho - maximally_mixed()).norm() < 1e-3);
}

TEST_CASE("total variation shrinks with shots") {
    const Mat4 truth = 0.9 * target_state(0.3) + 0.1 * maximally_mixed();
    const auto p_true = born_probabilities(truth);
    std::mt19937_64 rng(9);
    double prev = 1e9;
    for (int shots : {1000, 10000, 1000000}) {
        const auto rec = reconstruct(sample_counts(truth, shots, rng));
        const auto p = born_probabilities(rec.rho);
        double tv = 0;
        for (int b = 0; b < 9; ++b)
            for (int o = 0; o < 4; ++o) tv += 0.5 * std::abs(p[b][o] - p_true[b][o]);
        CHECK(tv < prev);
        prev = tv;
    }
}

TEST_CASE("reconstruction stays physical under noise and the likelihood is monotone") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        const auto truth = random_state(rng);
        const auto counts = sample_counts(truth, 50, rng);
        const auto rec = reconstruct(counts);
        check_physical(rec.rho);
        const Mat4 seed = 0.999 * linear_inversion(counts) + 0.001 * maximally_mixed();
        const auto one = reconstruct(counts, 1);
        const auto two = reconstruct(counts, 2);
        CHECK(one.log_likelihood >= reconstruct(counts, 0).log_likelihood - 1e-15);
        CHECK(two.log_likelihood >= one.log_likelihood - 1e-15);
        CHECK(rec.log_likelihood >= two.log_likelihood - 1e-15);
        check_physical(seed);
    }
}

TEST_CASE("all-zero basis is rejected") {
    CountTable c;
    for (auto& row : c.counts) row = {10, 10, 10, 10};
    c.counts[4] = {0, 0, 0, 0};
    CHECK_THROWS_AS(reconstruct(c), InsufficientDataError);
}

TEST_CASE("bootstrap: scaling and determinism") {
    const Mat4 truth = 0.95 * target_state(0.91) + 0.05 * maximally_mixed();
    const auto small = expected_counts(truth, 2300);
    const auto big = expected_counts(truth, 230000);
    const auto bs = bootstrap(small, 60, 4);
    const auto bb = bootstrap(big, 60, 4);
    const double ratio = bs.fidelity_std / bb.fidelity_std;
    CHECK(ratio > 10 * 0.7);
    CHECK(ratio < 10 * 1.3);
    const auto again = bootstrap(small, 60, 4);
    CHECK(again.fidelity_std == bs.fidelity_std);
    CHECK(again.purity_std == bs.purity_std);
    const auto two = bootstrap(small, 2, 4);
    CHECK(two.low_confidence);
    CHECK(two.fidelity_std >= 0);
    CHECK_THROWS_AS(bootstrap(small, 1, 4), ValidationError);
}

TEST_CASE("background fidelity limit") {
    CHECK(background_fidelity_limit(0.462, 0, 60e-6) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(background_weight(0.0, 20, 60e-6) == doctest::Approx(1.0));
    CHECK(background_fidelity_limit(0.0, 20, 60e-6) == doctest::Approx(0.25).epsilon(1e-12));
    // closed form 1 - 3w/4 for a Bell state diluted with I/4
    const double w = 20 * 60e-6 / (0.462 + 20 * 60e-6);
    CHECK(background_fidelity_limit(0.462, 20, 60e-6) == doctest::Approx(1 - 0.75 * w).epsilon(1e-12));
    CHECK(background_fidelity_limit(0.462, 20, 60e-6) == doctest::Approx(0.9974).epsilon(0.001));
    CHECK_THROWS_AS(background_weight(0.4, -1, 60e-6), ValidationError);
}
