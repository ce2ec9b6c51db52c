#pragma once

#include <Eigen/Dense>
#include <functional>

namespace cpk {

using CVec = Eigen::VectorXcd;
using OdeRhs = std::function<void(double t, const CVec& y, CVec& dydt)>;

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 0.0;       // 0 picks a starting step automatically
    double h_min = 0.0;        // 0 means 1e-14 * max(|t|, span)
    long max_steps = 50'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_calls = 0;
    double last_h = 0.0;       // feed back as h_init to continue a run
};

// Adaptive Dormand-Prince 5(4) from t0 to t1, y updated in place.
// Throws IntegrationError (carrying the time) on step underflow or non-finite state.
void dopri5(const OdeRhs& f, double t0, double t1, CVec& y, const OdeOptions& opt,
            OdeStats* stats = nullptr);

}  // namespace cpk
