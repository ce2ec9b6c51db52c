#pragma once

#include <vector>

#include "cpk/atomic.hpp"

namespace cpk {

enum class Variant { Full, Pure };

struct BoundInput {
    double c;
    double r_u;
    double t2;
    double alpha_loss;
    Variant variant = Variant::Full;
};

struct BoundResult {
    double p_in;
    double p_esc;
    double p_s;
    std::vector<double> terms;  // j-th reexcitation term of P_in, when requested
};

double p_escape(double t2, double alpha_loss);

// Closed form. With n_terms > 0 the first n_terms series terms are also returned.
BoundResult p_bound(const BoundInput& in, int n_terms = 0);

// Partial sum of the reexcitation series, j = 0..n_terms-1.
double p_in_series(double c, double r_u, int n_terms);

double t2_optimal(double beta, double alpha_loss, double a_tilde);
double p_opt(double beta, double alpha_loss, double a_tilde);
double beta(const SchemeRates& s, Variant v);

}  // namespace cpk
