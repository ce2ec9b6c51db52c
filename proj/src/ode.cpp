#include "cpk/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpk/errors.hpp"

namespace cpk {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// error coefficients: 5th order minus embedded 4th order
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const CVec& err, const CVec& y0, const CVec& y1, const OdeOptions& opt) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = std::abs(err[i]) / sc;
        acc += r * r;
    }
    return std::sqrt(acc / std::max<Eigen::Index>(1, err.size()));
}

}  // namespace

void dopri5(const OdeRhs& f, double t0, double t1, CVec& y, const OdeOptions& opt, OdeStats* stats) {
    OdeStats local;
    OdeStats& st = stats ? *stats : local;
    const double span = t1 - t0;
    if (span == 0.0) return;
    if (span < 0) throw IntegrationError("dopri5 integrates forward only", t0);

    const Eigen::Index n = y.size();
    CVec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

    double t = t0;
    f(t, y, k1);
    ++st.rhs_calls;

    double h = opt.h_init > 0 ? opt.h_init : st.last_h;
    if (!(h > 0)) {
        // Hairer's starting-step heuristic, first stage only
        double d0 = 0, d1 = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y[i]);
            d0 += std::norm(y[i]) / (sc * sc);
            d1 += std::norm(k1[i]) / (sc * sc);
        }
        d0 = std::sqrt(d0 / std::max<Eigen::Index>(1, n));
        d1 = std::sqrt(d1 / std::max<Eigen::Index>(1, n));
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    }
    h = std::min(h, span);
    const double h_min = opt.h_min > 0 ? opt.h_min : 1e-14 * std::max(std::abs(t0), std::abs(span));

    double proposed = h;
    bool last_rejected = false;
    while (t < t1) {
        if (st.accepted + st.rejected >= opt.max_steps)
            throw IntegrationError("dopri5 exceeded max_steps at t=" + std::to_string(t), t);
        bool final_step = false;
        proposed = h;
        if (t + h >= t1) {
            h = t1 - t;
            final_step = true;
        }
        if (h < h_min && !final_step)
            throw IntegrationError("dopri5 step size underflow at t=" + std::to_string(t), t);

        ytmp = y + h * (a21 * k1);
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7);
        st.rhs_calls += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = error_norm(err, y, ynew, opt);
        if (!std::isfinite(en))
            throw IntegrationError("dopri5 produced a non-finite state at t=" + std::to_string(t), t);

        if (en <= 1.0) {
            t = final_step ? t1 : t + h;
            y.swap(ynew);
            k1.swap(k7);
            ++st.accepted;
            double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 10.0;
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            h *= fac;
            last_rejected = false;
        } else {
            ++st.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
        }
    }
    st.last_h = proposed;
}

}  // namespace cpk
