#include "cpk/tomography.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"
#include "cpk/parallel.hpp"

namespace cpk {

namespace {

using cd = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;

Vec2 eigenstate(Pauli p, int bit) {
    const double s = 1.0 / std::sqrt(2.0);
    const double sign = bit ? -1.0 : 1.0;
    switch (p) {
        case Pauli::Z: return bit ? Vec2(0, 1) : Vec2(1, 0);
        case Pauli::X: return Vec2(s, sign * s);
        case Pauli::Y: return Vec2(s, cd(0, sign * s));
    }
    return Vec2(1, 0);
}

Mat2 pauli_matrix(int k) {  // 0 I, 1 X, 2 Y, 3 Z
    Mat2 m;
    switch (k) {
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, cd(0, -1), cd(0, 1), 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: m.setIdentity();
    }
    return m;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return r;
}

int pauli_to_matrix_index(Pauli p) {
    switch (p) {
        case Pauli::X: return 1;
        case Pauli::Y: return 2;
        case Pauli::Z: return 3;
    }
    return 0;
}

std::vector<Projector> build_set() {
    std::vector<Projector> out;
    for (Pauli pb : {Pauli::Z, Pauli::X, Pauli::Y}) {
        for (Pauli ib : {Pauli::Z, Pauli::X, Pauli::Y}) {
            for (int o = 0; o < 4; ++o) {
                const int photon_bit = o / 2, ion_bit = o % 2;
                const Vec2 vi = eigenstate(ib, ion_bit), vp = eigenstate(pb, photon_bit);
                Mat4 op = kron(vi * vi.adjoint(), vp * vp.adjoint());
                out.push_back({pb, ib, outcome_label(o), op});
            }
        }
    }
    return out;
}

std::array<std::array<double, 4>, 9> frequencies(const CountTable& c) {
    std::array<std::array<double, 4>, 9> f{};
    for (int b = 0; b < 9; ++b) {
        double tot = 0;
        for (double n : c.counts[b]) {
            if (n < 0) throw ValidationError("counts must be non-negative");
            tot += n;
        }
        if (!(tot > 0)) throw InsufficientDataError("basis setting " + std::to_string(b) + " has no counts");
        for (int o = 0; o < 4; ++o) f[b][o] = c.counts[b][o] / tot;
    }
    return f;
}

Mat4 hermitize(const Mat4& m) { return 0.5 * (m + m.adjoint()); }

double log_likelihood(const Mat4& rho, const std::array<std::array<double, 4>, 9>& f) {
    double ll = 0;
    for (int b = 0; b < 9; ++b)
        for (int o = 0; o < 4; ++o) {
            if (f[b][o] <= 0) continue;
            const double p = std::max(1e-300, (projector(b, o).op * rho).trace().real());
            ll += f[b][o] * std::log(p);
        }
    return ll;
}

}  // namespace

std::string pauli_name(Pauli p) {
    switch (p) {
        case Pauli::Z: return "Z";
        case Pauli::X: return "X";
        case Pauli::Y: return "Y";
    }
    return "?";
}

Pauli parse_pauli(const std::string& s) {
    if (s == "Z" || s == "z") return Pauli::Z;
    if (s == "X" || s == "x") return Pauli::X;
    if (s == "Y" || s == "y") return Pauli::Y;
    throw ValidationError("unknown basis '" + s + "' (expected Z, X or Y)");
}

int outcome_index(const std::string& label) {
    if (label.size() != 2) throw ValidationError("outcome label must be two signs, got '" + label + "'");
    auto bit = [&](char c) {
        if (c == '+') return 0;
        if (c == '-') return 1;
        throw ValidationError("outcome label must be two signs, got '" + label + "'");
    };
    return 2 * bit(label[0]) + bit(label[1]);
}

std::string outcome_label(int o) {
    std::string s;
    s += (o / 2) ? '-' : '+';
    s += (o % 2) ? '-' : '+';
    return s;
}

std::vector<Projector> measurement_set() { return build_set(); }

const Projector& projector(int setting, int outcome) {
    static const std::vector<Projector> set = build_set();
    return set[4 * setting + outcome];
}

Mat4 target_state(double theta) {
    Eigen::Vector4cd psi(1.0 / std::sqrt(2.0), 0, 0, std::polar(1.0 / std::sqrt(2.0), theta));
    return psi * psi.adjoint();
}

Mat4 maximally_mixed() { return Mat4::Identity() / 4.0; }

Mat4 project_physical(const Mat4& m) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(hermitize(m));
    Eigen::Vector4d ev = es.eigenvalues();
    // Euclidean projection of the spectrum onto the probability simplex.
    std::array<double, 4> u{ev[0], ev[1], ev[2], ev[3]};
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, shift = 0;
    for (int k = 0; k < 4; ++k) {
        css += u[k];
        const double t = (css - 1.0) / (k + 1);
        if (u[k] - t > 0) shift = t;
    }
    for (int k = 0; k < 4; ++k) ev[k] = std::max(0.0, ev[k] - shift);
    Mat4 r = es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
    return hermitize(r) / r.trace().real();
}

Mat4 linear_inversion(const CountTable& counts) {
    const auto f = frequencies(counts);
    // Correlator <ion_mu (x) photon_nu>; identity entries averaged over the unused basis.
    double corr[4][4] = {};
    double seen[4][4] = {};
    for (int pb = 0; pb < 3; ++pb) {
        for (int ib = 0; ib < 3; ++ib) {
            const int b = 3 * pb + ib;
            const int mu = pauli_to_matrix_index(static_cast<Pauli>(ib));
            const int nu = pauli_to_matrix_index(static_cast<Pauli>(pb));
            double e_ion = 0, e_ph = 0, e_both = 0;
            for (int o = 0; o < 4; ++o) {
                const double si = (o % 2) ? -1.0 : 1.0, sp = (o / 2) ? -1.0 : 1.0;
                e_ion += si * f[b][o];
                e_ph += sp * f[b][o];
                e_both += si * sp * f[b][o];
            }
            corr[mu][nu] += e_both;
            seen[mu][nu] += 1;
            corr[mu][0] += e_ion;
            seen[mu][0] += 1;
            corr[0][nu] += e_ph;
            seen[0][nu] += 1;
        }
    }
    Mat4 rho = kron(pauli_matrix(0), pauli_matrix(0)) / 4.0;
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
            if (mu == 0 && nu == 0) continue;
            rho += corr[mu][nu] / seen[mu][nu] / 4.0 * kron(pauli_matrix(mu), pauli_matrix(nu));
        }
    return project_physical(rho);
}

ReconResult reconstruct(const CountTable& counts, int max_iter, double tol) {
    const auto f = frequencies(counts);
    // Full-rank seed so the multiplicative update can reach every direction.
    Mat4 rho = 0.999 * linear_inversion(counts) + 0.001 * maximally_mixed();
    double ll = log_likelihood(rho, f);
    double eps = 1.0;
    const Mat4 id = Mat4::Identity();
    ReconResult res{rho, false, 0, ll};
    for (int it = 1; it <= max_iter; ++it) {
        Mat4 r = Mat4::Zero();
        for (int b = 0; b < 9; ++b)
            for (int o = 0; o < 4; ++o) {
                if (f[b][o] <= 0) continue;
                const auto& p = projector(b, o).op;
                r += f[b][o] / std::max(1e-300, (p * rho).trace().real()) * p;
            }
        r /= 9.0;
        // Diluted R rho R step; shrink until the likelihood does not decrease.
        Mat4 next;
        double ll_next = ll;
        bool accepted = false;
        for (double e = std::min(1.0, 2.0 * eps); e > 1e-12; e *= 0.5) {
            const Mat4 m = id + e * r;
            next = hermitize(m * rho * m.adjoint());
            next /= next.trace().real();
            ll_next = log_likelihood(next, f);
            if (ll_next >= ll) {
                eps = e;
                accepted = true;
                break;
            }
        }
        res.iterations = it;
        if (!accepted) {
            res.converged = true;
            break;
        }
        const double gain = ll_next - ll;
        rho = next;
        ll = ll_next;
        if (gain < tol) {
            res.converged = true;
            break;
        }
    }
    res.rho = rho;
    res.log_likelihood = ll;
    return res;
}

double fidelity(const Mat4& rho, double theta) {
    return (target_state(theta) * rho).trace().real();
}

double purity(const Mat4& rho) { return (rho * rho).trace().real(); }

StateMetrics metrics(const Mat4& rho, std::optional<double> theta) {
    double th;
    if (theta) {
        th = *theta;
    } else {
        // F(theta) is a sinusoid; golden-section on the half-period window around its peak.
        const double centre = -std::arg(rho(0, 3));
        double a = centre - kPi / 2, b = centre + kPi / 2;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = fidelity(rho, c), fd = fidelity(rho, d);
        while (b - a > 1e-6) {
            if (fc > fd) {
                b = d; d = c; fd = fc;
                c = b - gr * (b - a);
                fc = fidelity(rho, c);
            } else {
                a = c; c = d; fc = fd;
                d = a + gr * (b - a);
                fd = fidelity(rho, d);
            }
        }
        th = 0.5 * (a + b);
    }
    th = std::fmod(th, kTwoPi);
    if (th < 0) th += kTwoPi;
    StateMetrics m{};
    m.theta = th;
    m.fidelity = fidelity(rho, th);
    m.purity = purity(rho);
    m.bound_gap = std::sqrt(m.purity) - m.fidelity;
    return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

BootstrapResult bootstrap(const CountTable& counts, int m, std::uint64_t seed) {
    if (m < 2) throw ValidationError("bootstrap needs M >= 2");
    BootstrapResult out{};
    out.estimate = metrics(reconstruct(counts).rho);
    std::vector<double> fid(m, std::nan("")), pur(m, std::nan(""));
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t k) {
        std::mt19937_64 rng(splitmix64(seed + 0x632be59bd9b4e019ULL * (k + 1)));
        CountTable resample = counts;
        for (auto& row : resample.counts)
            for (double& n : row) {
                if (n > 0) {
                    std::poisson_distribution<long long> pois(n);
                    n = static_cast<double>(pois(rng));
                }
            }
        try {
            const auto rho = reconstruct(resample).rho;
            const auto s = metrics(rho);
            fid[k] = s.fidelity;
            pur[k] = s.purity;
        } catch (const InsufficientDataError&) {
        }
    });
    std::vector<double> f_ok, p_ok;
    for (int k = 0; k < m; ++k)
        if (!std::isnan(fid[k])) {
            f_ok.push_back(fid[k]);
            p_ok.push_back(pur[k]);
        }
    out.resamples = static_cast<int>(f_ok.size());
    out.failed = m - out.resamples;
    out.low_confidence = out.resamples < 10;
    auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double acc = 0;
        for (double x : v) acc += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(acc / (v.size() - 1)) : 0.0;
    };
    if (out.resamples < 2) throw ComputationError("fewer than two bootstrap resamples succeeded");
    mean_std(f_ok, out.fidelity_mean, out.fidelity_std);
    mean_std(p_ok, out.purity_mean, out.purity_std);
    return out;
}

double background_weight(double signal_per_attempt, double background_rate, double window) {
    if (signal_per_attempt < 0 || background_rate < 0 || window < 0)
        throw ValidationError("background inputs must be non-negative");
    const double b = background_rate * window;
    if (b == 0) return 0.0;
    return b / (signal_per_attempt + b);
}

double background_fidelity_limit(double signal_per_attempt, double background_rate, double window) {
    const double w = background_weight(signal_per_attempt, background_rate, window);
    const Mat4 rho = (1.0 - w) * target_state(0.0) + w * maximally_mixed();
    return fidelity(rho, 0.0);
}

std::array<std::array<double, 4>, 9> born_probabilities(const Mat4& rho) {
    std::array<std::array<double, 4>, 9> p{};
    for (int b = 0; b < 9; ++b)
        for (int o = 0; o < 4; ++o) p[b][o] = std::max(0.0, (projector(b, o).op * rho).trace().real());
    return p;
}

CountTable expected_counts(const Mat4& rho, double shots_per_basis) {
    CountTable c;
    const auto p = born_probabilities(rho);
    for (int b = 0; b < 9; ++b)
        for (int o = 0; o < 4; ++o) c.counts[b][o] = shots_per_basis * p[b][o];
    return c;
}

CountTable sample_counts(const Mat4& rho, int shots_per_basis, std::mt19937_64& rng) {
    CountTable c;
    const auto p = born_probabilities(rho);
    for (int b = 0; b < 9; ++b) {
        std::discrete_distribution<int> dist(p[b].begin(), p[b].end());
        for (int s = 0; s < shots_per_basis; ++s) c.counts[b][dist(rng)] += 1;
    }
    return c;
}

}  // namespace cpk
