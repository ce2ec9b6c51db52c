#include "cpk/bounds.hpp"

#include <cmath>

#include "cpk/errors.hpp"

namespace cpk {

namespace {

void check(const BoundInput& in) {
    if (!(in.c > 0)) throw ValidationError("cooperativity must be > 0");
    if (!(in.r_u >= 0 && in.r_u < 1)) throw ValidationError("r_u must lie in [0,1)");
    if (!(in.t2 >= 0 && in.t2 < 1)) throw ValidationError("t2 must lie in [0,1)");
    if (!(in.alpha_loss >= 0 && in.alpha_loss < 1)) throw ValidationError("alpha_loss must lie in [0,1)");
    if (!(in.t2 + in.alpha_loss > 0)) throw ValidationError("t2 + alpha_loss must be > 0");
}

}  // namespace

double p_escape(double t2, double alpha_loss) {
    if (!(t2 + alpha_loss > 0)) throw ValidationError("t2 + alpha_loss must be > 0");
    return t2 / (t2 + alpha_loss);
}

double p_in_series(double c, double r_u, int n_terms) {
    const double q = r_u / (1.0 + 2.0 * c);
    double term = 2.0 * c / (1.0 + 2.0 * c), sum = 0.0;
    for (int j = 0; j < n_terms; ++j) {
        sum += term;
        term *= q;
    }
    return sum;
}

BoundResult p_bound(const BoundInput& in, int n_terms) {
    check(in);
    const double r_u = in.variant == Variant::Pure ? 0.0 : in.r_u;
    if (r_u / (1.0 + 2.0 * in.c) >= 1.0) throw ComputationError("reexcitation series diverges");
    BoundResult r{};
    r.p_in = 2.0 * in.c / (1.0 + 2.0 * in.c - r_u);
    r.p_esc = p_escape(in.t2, in.alpha_loss);
    r.p_s = r.p_in * r.p_esc;
    if (n_terms > 0) {
        const double q = r_u / (1.0 + 2.0 * in.c);
        double term = 2.0 * in.c / (1.0 + 2.0 * in.c);
        for (int j = 0; j < n_terms; ++j) {
            r.terms.push_back(term);
            term *= q;
        }
    }
    return r;
}

double t2_optimal(double beta, double alpha_loss, double a_tilde) {
    if (!(alpha_loss > 0 && a_tilde > 0 && beta >= 0))
        throw ValidationError("t2_optimal needs alpha_loss, a_tilde > 0 and beta >= 0");
    return alpha_loss * std::sqrt(1.0 + beta / alpha_loss * 2.0 / a_tilde);
}

double p_opt(double beta, double alpha_loss, double a_tilde) {
    if (!(alpha_loss > 0 && a_tilde > 0 && beta >= 0))
        throw ValidationError("p_opt needs alpha_loss, a_tilde > 0 and beta >= 0");
    return 1.0 - 2.0 / (1.0 + std::sqrt(1.0 + beta / alpha_loss * 2.0 / a_tilde));
}

double beta(const SchemeRates& s, Variant v) {
    const double z2 = s.zeta * s.zeta;
    if (v == Variant::Pure) return z2 * s.gamma_g / (s.gamma_g + s.gamma_u + s.gamma_o);
    return z2 * s.gamma_g / (s.gamma_g + s.gamma_o);
}

}  // namespace cpk
