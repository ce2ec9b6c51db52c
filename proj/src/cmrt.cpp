#include "cpk/cmrt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cpk/constants.hpp"
#include "cpk/errors.hpp"

namespace cpk {

namespace {

using Trip = Eigen::Triplet<cd>;

SpMat identity(int n) {
    SpMat m(n, n);
    m.setIdentity();
    return m;
}

SpMat spre(const SpMat& a) { return Eigen::kroneckerProduct(identity(a.rows()), a).eval(); }
SpMat spost(const SpMat& a) {
    SpMat at = a.transpose();
    return Eigen::kroneckerProduct(at, identity(a.rows())).eval();
}
SpMat comm(const SpMat& h) { return cd(0, -1) * (spre(h) - spost(h)); }

SpMat jump_part(const SpMat& l) {
    SpMat lc = l.conjugate();
    return Eigen::kroneckerProduct(lc, l).eval();
}

SpMat dissipator(const SpMat& l) {
    SpMat ldl = l.adjoint() * l;
    return jump_part(l) - 0.5 * spre(ldl) - 0.5 * spost(ldl);
}

CMat restrict(const SpMat& m, const std::vector<long long>& index,
              const std::vector<int>& full_to_red) {
    const int n = static_cast<int>(index.size());
    CMat r = CMat::Zero(n, n);
    for (int c = 0; c < n; ++c) {
        for (SpMat::InnerIterator it(m, index[c]); it; ++it) {
            const int row = full_to_red[it.row()];
            if (row >= 0) r(row, c) = it.value();
        }
    }
    return r;
}

struct Observables {
    Eigen::VectorXd trace, n_h, n_v;
    std::map<std::string, Eigen::VectorXd> pops;
    std::array<std::array<int, 4>, 4> two_qubit{};  // reduced coordinate or -1
    std::array<double, 4> two_qubit_energy{};
};

// Generator coefficients for a drive with one static part and periodic components.
struct Generator {
    CMat l0;
    struct Periodic {
        double omega, offset, phase;
    };
    std::vector<Periodic> periodic;
    double period = 0;
    const CMat* raise = nullptr;
    const CMat* lower = nullptr;

    CMat at(double t) const {
        CMat m = l0;
        for (const auto& p : periodic) {
            m += p.omega * std::polar(1.0, -(p.offset * t + p.phase)) * (*raise);
            m += p.omega * std::polar(1.0, p.offset * t + p.phase) * (*lower);
        }
        return m;
    }
    void apply(double t, const CVec& y, CVec& dy) const {
        dy.noalias() = l0 * y;
        if (periodic.empty()) return;
        cd a = 0, b = 0;
        for (const auto& p : periodic) {
            a += p.omega * std::polar(1.0, -(p.offset * t + p.phase));
            b += p.omega * std::polar(1.0, p.offset * t + p.phase);
        }
        dy.noalias() += a * ((*raise) * y);
        dy.noalias() += b * ((*lower) * y);
    }
};

double trapezoid(const std::vector<double>& y, double h) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

}  // namespace

double DriveConfig::total_rabi() const {
    double s = 0;
    for (const auto& c : components) s += c.rabi * c.rabi;
    return std::sqrt(s);
}

int SystemModel::level_index(Sublevel s) const {
    for (int i = 0; i < static_cast<int>(levels.size()); ++i)
        if (levels[i] == s) return i;
    throw ValidationError("sublevel not in model");
}

int SystemModel::index(int level, int n_h, int n_v) const {
    return (level * (n_max + 1) + n_h) * (n_max + 1) + n_v;
}

void validate(const SimOptions& opt) {
    if (opt.n_max < 1) throw ValidationError("n_max must be >= 1");
    if (!(opt.jitter_rate >= 0)) throw ValidationError("jitter rate must be >= 0");
    if (!(opt.sample_dt > 0)) throw ValidationError("sample_dt must be > 0");
    if (opt.period_slices < 1 || opt.period_samples < 1)
        throw ValidationError("period_slices and period_samples must be >= 1");
    if (!(opt.ode.rtol > 0 && opt.ode.atol > 0)) throw ValidationError("tolerances must be > 0");
    if (!(opt.check_interval > 0)) throw ValidationError("check_interval must be > 0");
}

SystemModel build_system(const EmitterModel& em, const CavityModel& cav, const SimOptions& opt,
                         const std::string& polarization) {
    validate(em);
    validate(opt);
    if (polarization != "sigma-")
        throw ValidationError("drive polarization must be sigma- for this geometry");

    SystemModel m;
    m.emitter = em;
    m.cavity = cav;
    m.n_max = opt.n_max;
    for (Term t : {Term::S12, Term::P12, Term::P32, Term::D32, Term::D52})
        for (int two_m : manifold(em, t).two_m) m.levels.push_back({t, two_m});
    const int nl = static_cast<int>(m.levels.size());
    const int np = opt.n_max + 1;
    m.dim = nl * np * np;
    for (int l = 0; l < nl; ++l)
        for (int h = 0; h < np; ++h)
            for (int v = 0; v < np; ++v) m.basis.push_back({l, h, v});

    m.level_energy.assign(nl, 0.0);
    for (int l = 0; l < nl; ++l) {
        const Sublevel s = m.levels[l];
        if (s.term == Term::S12) m.level_energy[l] = zeeman_energy(em, s) - zeeman_energy(em, m.initial);
        if (s.term == Term::P32) m.level_energy[l] = zeeman_energy(em, s) - zeeman_energy(em, m.excited);
        if (s.term == Term::D52) m.level_energy[l] = zeeman_energy(em, s) - zeeman_energy(em, m.g1);
    }

    const int d = m.dim;
    std::vector<Trip> h, p32, d52, raise, nh, nv;
    for (int i = 0; i < d; ++i) {
        const auto& b = m.basis[i];
        const Term t = m.levels[b.level].term;
        if (m.level_energy[b.level] != 0.0) h.emplace_back(i, i, m.level_energy[b.level]);
        if (t == Term::P32) p32.emplace_back(i, i, 1.0);
        if (t == Term::D52) d52.emplace_back(i, i, 1.0);
        if (b.n_h) nh.emplace_back(i, i, static_cast<double>(b.n_h));
        if (b.n_v) nv.emplace_back(i, i, static_cast<double>(b.n_v));
    }

    // Cavity coupling, P3/2 -> D5/2 with the photon in H (dm = 0) or V (|dm| = 1).
    const double r_d52 = branching_of(em, Term::D52);
    const double g_unit = std::sqrt(cav.c * em.gamma_total * r_d52 / (2.0 * cav.geometry.length * cav.geo.a_tilde));
    for (int lu = 0; lu < nl; ++lu) {
        if (m.levels[lu].term != Term::P32) continue;
        for (int ll = 0; ll < nl; ++ll) {
            if (m.levels[ll].term != Term::D52) continue;
            const double cg = dipole_cg(em, Term::D52, m.levels[ll].two_m, m.levels[lu].two_m);
            if (cg == 0.0) continue;
            const bool to_h = m.levels[lu].two_m == m.levels[ll].two_m;
            const double g = (to_h ? 1.0 : std::sqrt(0.5)) * cg * g_unit;
            if (m.levels[lu] == m.excited && m.levels[ll] == m.g1) m.g_v = std::abs(g);
            if (m.levels[lu] == m.excited && m.levels[ll] == m.g2) m.g_h = std::abs(g);
            for (int a = 0; a < np; ++a)
                for (int b = 0; b < np; ++b) {
                    const int nh_up = to_h ? a + 1 : a, nv_up = to_h ? b : b + 1;
                    if (nh_up > opt.n_max || nv_up > opt.n_max) continue;
                    const int i = m.index(lu, a, b);
                    const int j = m.index(ll, nh_up, nv_up);
                    const double amp = g * std::sqrt(static_cast<double>(to_h ? nh_up : nv_up));
                    h.emplace_back(j, i, amp);
                    h.emplace_back(i, j, amp);
                }
        }
    }

    // sigma- drive S1/2(m) -> P3/2(m-1), weighted relative to the u -> e line.
    const double cg_ref = dipole_cg(em, Term::S12, m.initial.two_m, m.excited.two_m);
    for (int ls = 0; ls < nl; ++ls) {
        if (m.levels[ls].term != Term::S12) continue;
        const Sublevel up{Term::P32, m.levels[ls].two_m - 2};
        const double cg = dipole_cg(em, Term::S12, m.levels[ls].two_m, up.two_m);
        if (cg == 0.0) continue;
        const int lu = m.level_index(up);
        for (int a = 0; a < np; ++a)
            for (int b = 0; b < np; ++b) raise.emplace_back(m.index(lu, a, b), m.index(ls, a, b), 0.5 * cg / cg_ref);
    }

    auto build = [d](const std::vector<Trip>& t) {
        SpMat s(d, d);
        s.setFromTriplets(t.begin(), t.end());
        return s;
    };
    m.h_static = build(h);
    m.proj_p32 = build(p32);
    m.proj_d52 = build(d52);
    m.drive_raise = build(raise);
    m.num_h = build(nh);
    m.num_v = build(nv);

    for (const auto& ch : decay_channel_table(em)) {
        const int lu = m.level_index(ch.upper), ll = m.level_index(ch.lower);
        std::vector<Trip> t;
        for (int a = 0; a < np; ++a)
            for (int b = 0; b < np; ++b) t.emplace_back(m.index(ll, a, b), m.index(lu, a, b), std::sqrt(2.0 * ch.rate));
        m.collapse.push_back({"spontaneous", ch.rate, build(t), ch.lower == m.initial});
    }
    m.kappa_ext = cav.rates.kappa_ext;
    m.kappa_in = cav.rates.kappa_in;
    for (int mode = 0; mode < 2; ++mode) {
        std::vector<Trip> t;
        for (int i = 0; i < d; ++i) {
            const auto& b = m.basis[i];
            const int n = mode == 0 ? b.n_h : b.n_v;
            if (n == 0) continue;
            const int j = mode == 0 ? m.index(b.level, n - 1, b.n_v) : m.index(b.level, b.n_h, n - 1);
            t.emplace_back(j, i, std::sqrt(static_cast<double>(n)));
        }
        const SpMat a = build(t);
        m.collapse.push_back({"cavity_ext", m.kappa_ext, (std::sqrt(2.0 * m.kappa_ext) * a).eval(), false});
        m.collapse.push_back({"cavity_in", m.kappa_in, (std::sqrt(2.0 * m.kappa_in) * a).eval(), false});
    }
    if (opt.jitter_rate > 0)
        m.collapse.push_back({"dephasing", opt.jitter_rate, (std::sqrt(2.0 * opt.jitter_rate) * m.proj_d52).eval(), false});

    // Superoperators on vec(rho), column-major.
    SpMat l_static = comm(m.h_static);
    SpMat l_return(static_cast<long long>(d) * d, static_cast<long long>(d) * d);
    for (const auto& c : m.collapse) {
        l_static += dissipator(c.op);
        if (c.returns_to_initial) l_return += jump_part(c.op);
    }
    const SpMat l_p32 = comm(m.proj_p32), l_d52 = comm(m.proj_d52);
    const SpMat l_raise = comm(m.drive_raise);
    const SpMat r_dag = m.drive_raise.adjoint();
    const SpMat l_lower = comm(r_dag);

    // Reachable coordinates from vec(|u,0,0><u,0,0|) over the union sparsity pattern.
    const long long nd = static_cast<long long>(d) * d;
    const int i0 = m.index(m.level_index(m.initial), 0, 0);
    const long long k0 = static_cast<long long>(i0) * d + i0;
    std::vector<char> seen(nd, 0);
    std::vector<long long> stack{k0};
    seen[k0] = 1;
    const SpMat* parts[] = {&l_static, &l_p32, &l_d52, &l_raise, &l_lower};
    while (!stack.empty()) {
        const long long col = stack.back();
        stack.pop_back();
        for (const SpMat* p : parts)
            for (SpMat::InnerIterator it(*p, col); it; ++it)
                if (it.value() != cd(0) && !seen[it.row()]) {
                    seen[it.row()] = 1;
                    stack.push_back(it.row());
                }
    }
    auto& rl = m.liouville;
    std::vector<int> full_to_red(nd, -1);
    for (long long k = 0; k < nd; ++k)
        if (seen[k]) {
            full_to_red[k] = static_cast<int>(rl.index.size());
            rl.index.push_back(k);
        }
    rl.l_static = restrict(l_static, rl.index, full_to_red);
    rl.l_p32 = restrict(l_p32, rl.index, full_to_red);
    rl.l_d52 = restrict(l_d52, rl.index, full_to_red);
    rl.l_raise = restrict(l_raise, rl.index, full_to_red);
    rl.l_lower = restrict(l_lower, rl.index, full_to_red);
    rl.l_return = restrict(l_return, rl.index, full_to_red);
    rl.rho0 = Eigen::VectorXcd::Zero(rl.index.size());
    rl.rho0[full_to_red[k0]] = 1.0;
    return m;
}

double light_shift(const DriveConfig& drive) {
    double s = 0;
    for (const auto& c : drive.components)
        if (c.detuning != 0.0) s += c.rabi * c.rabi / (4.0 * c.detuning);
    return s;
}

DriveConfig monochromatic_drive(double rabi, double detuning, double duration) {
    return {{{rabi, detuning, 0.0}}, duration, "sigma-"};
}

DriveConfig bichromatic_drive(const SystemModel& model, double rabi1, double rabi2, double detuning,
                              double phase, double duration) {
    const double z = zeeman_splitting(model.emitter, Term::D52, model.g1.two_m, model.g2.two_m);
    return {{{rabi1, detuning, 0.0}, {rabi2, detuning + z, phase}}, duration, "sigma-"};
}

namespace {

Observables make_observables(const SystemModel& m) {
    const auto& idx = m.liouville.index;
    const int n = static_cast<int>(idx.size());
    Observables o;
    o.trace = Eigen::VectorXd::Zero(n);
    o.n_h = Eigen::VectorXd::Zero(n);
    o.n_v = Eigen::VectorXd::Zero(n);
    const char* names[] = {"u", "e", "g1", "g2", "S1/2", "P1/2", "P3/2", "D3/2", "D5/2"};
    for (const char* nm : names) o.pops[nm] = Eigen::VectorXd::Zero(n);
    const int lu = m.level_index(m.initial), le = m.level_index(m.excited);
    const int lg1 = m.level_index(m.g1), lg2 = m.level_index(m.g2);
    for (int k = 0; k < n; ++k) {
        const long long i = idx[k] % m.dim, j = idx[k] / m.dim;
        if (i != j) continue;
        const auto& b = m.basis[i];
        o.trace[k] = 1;
        o.n_h[k] = b.n_h;
        o.n_v[k] = b.n_v;
        if (b.level == lu) o.pops["u"][k] = 1;
        if (b.level == le) o.pops["e"][k] = 1;
        if (b.level == lg1) o.pops["g1"][k] = 1;
        if (b.level == lg2) o.pops["g2"][k] = 1;
        o.pops[term_label(m.levels[b.level].term)][k] = 1;
    }
    const int states[4] = {m.index(lg1, 0, 1), m.index(lg1, 1, 0), m.index(lg2, 0, 1), m.index(lg2, 1, 0)};
    const double energies[4] = {m.level_energy[lg1], m.level_energy[lg1], m.level_energy[lg2], m.level_energy[lg2]};
    for (int a = 0; a < 4; ++a) {
        o.two_qubit_energy[a] = energies[a];
        for (int b = 0; b < 4; ++b) {
            const long long key = static_cast<long long>(states[b]) * m.dim + states[a];
            auto it = std::lower_bound(idx.begin(), idx.end(), key);
            o.two_qubit[a][b] = (it != idx.end() && *it == key) ? static_cast<int>(it - idx.begin()) : -1;
        }
    }
    return o;
}

CMat full_state(const SystemModel& m, const CVec& v) {
    CMat rho = CMat::Zero(m.dim, m.dim);
    for (int k = 0; k < v.size(); ++k) {
        const long long key = m.liouville.index[k];
        rho(key % m.dim, key / m.dim) = v[k];
    }
    return rho;
}

double min_eigenvalue(const CMat& rho) {
    const CMat h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Generator make_generator(const SystemModel& m, const DriveConfig& drive, const SimOptions& opt,
                         bool conditional) {
    const auto& rl = m.liouville;
    Generator g;
    g.raise = &rl.l_raise;
    g.lower = &rl.l_lower;
    const double delta1 = drive.components.front().detuning;
    const double ls = opt.light_shift_compensation ? light_shift(drive) : 0.0;
    g.l0 = rl.l_static - delta1 * rl.l_p32 + ls * rl.l_d52;
    if (conditional) g.l0 -= rl.l_return;
    double base = 0;
    for (const auto& c : drive.components) {
        const double off = c.detuning - delta1;
        if (off == 0.0) {
            g.l0 += c.rabi * std::polar(1.0, -c.phase) * rl.l_raise;
            g.l0 += c.rabi * std::polar(1.0, c.phase) * rl.l_lower;
        } else {
            g.periodic.push_back({c.rabi, off, c.phase});
            if (base == 0.0 || std::abs(off) < base) base = std::abs(off);
        }
    }
    if (!g.periodic.empty()) {
        for (const auto& p : g.periodic) {
            const double ratio = std::abs(p.offset) / base;
            if (std::abs(ratio - std::round(ratio)) > 1e-9)
                throw ValidationError("drive components have incommensurate frequency offsets");
        }
        g.period = kTwoPi / base;
    }
    return g;
}

// Sample grid and per-sample propagation. sample(k, state) is called for k = 0..n.
struct Stepper {
    double h;
    long n;
    std::vector<CMat> props;  // propagator mode: one per sub-interval of the period
    const Generator* gen;
    SimMethod method;
    OdeOptions ode;
    OdeStats stats;

    void step(long k, CVec& v) {
        if (method == SimMethod::Propagator) {
            v = props[k % props.size()] * v;
        } else {
            const double t0 = k * h;
            dopri5([this](double t, const CVec& y, CVec& dy) { gen->apply(t, y, dy); }, t0, t0 + h, v, ode, &stats);
        }
    }
};

Stepper make_stepper(const Generator& g, const DriveConfig& drive, const SimOptions& opt) {
    Stepper s;
    s.gen = &g;
    s.method = opt.method;
    s.ode = opt.ode;
    int sub = 1;
    if (g.periodic.empty()) {
        s.n = std::max<long>(1, static_cast<long>(std::ceil(drive.duration / opt.sample_dt - 1e-9)));
        s.h = drive.duration / s.n;
    } else {
        sub = opt.period_samples;
        s.h = g.period / sub;
        s.n = std::max<long>(1, static_cast<long>(std::ceil(drive.duration / s.h - 1e-9)));
    }
    if (opt.method == SimMethod::RungeKutta) return s;
    if (g.periodic.empty()) {
        s.props.push_back((g.l0 * s.h).exp());
        return s;
    }
    // Fourth-order Magnus with two Gauss points per slice.
    const int per_sub = std::max(1, (opt.period_slices + sub - 1) / sub);
    const double hs = s.h / per_sub;
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
    for (int k = 0; k < sub; ++k) {
        CMat u = CMat::Identity(g.l0.rows(), g.l0.cols());
        for (int j = 0; j < per_sub; ++j) {
            const double t = k * s.h + j * hs;
            const CMat a1 = g.at(t + c1 * hs), a2 = g.at(t + c2 * hs);
            const CMat omega = 0.5 * hs * (a1 + a2) + (std::sqrt(3.0) / 12.0) * hs * hs * (a2 * a1 - a1 * a2);
            u = omega.exp() * u;
        }
        s.props.push_back(std::move(u));
    }
    return s;
}

}  // namespace

SimResult evolve(const SystemModel& model, const DriveConfig& drive, const SimOptions& opt) {
    validate(opt);
    if (drive.polarization != "sigma-")
        throw ValidationError("drive polarization must be sigma- for this geometry");
    if (drive.components.empty()) throw ValidationError("drive needs at least one component");
    if (!(drive.duration > 0)) throw ValidationError("duration must be > 0");
    for (const auto& c : drive.components)
        if (!(c.rabi >= 0) || c.detuning == 0.0) throw ValidationError("drive rabi must be >= 0 and detuning nonzero");

    const auto obs = make_observables(model);
    const Generator gen = make_generator(model, drive, opt, false);
    Stepper stepper = make_stepper(gen, drive, opt);

    SimResult r;
    r.reduced_dim = static_cast<int>(model.liouville.index.size());
    const double two_kext = 2.0 * model.kappa_ext;
    const double two_k = 2.0 * (model.kappa_ext + model.kappa_in);
    std::vector<double> flux_total_cav;
    std::array<std::array<std::vector<cd>, 4>, 4> tq;
    const long check_every = std::max<long>(1, static_cast<long>(std::llround(opt.check_interval / stepper.h)));
    r.min_eigenvalue = 0;

    CVec v = model.liouville.rho0;
    for (long k = 0; k <= stepper.n; ++k) {
        const double t = k * stepper.h;
        if (k > 0) stepper.step(k - 1, v);
        const double tr = (obs.trace.cast<cd>().dot(v)).real();
        r.max_trace_dev = std::max(r.max_trace_dev, std::abs(tr - 1.0));
        if (r.max_trace_dev > 1e-6)
            throw IntegrityError("trace drift beyond 1e-6 at t=" + std::to_string(t));
        const double nh = obs.n_h.cast<cd>().dot(v).real(), nv = obs.n_v.cast<cd>().dot(v).real();
        r.times.push_back(t);
        r.flux_h.push_back(two_kext * nh);
        r.flux_v.push_back(two_kext * nv);
        flux_total_cav.push_back(two_k * (nh + nv));
        for (const auto& [name, w] : obs.pops) r.populations[name].push_back(w.cast<cd>().dot(v).real());
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const int c = obs.two_qubit[a][b];
                const cd val = c >= 0 ? v[c] : cd(0);
                tq[a][b].push_back(two_kext * val * std::polar(1.0, (obs.two_qubit_energy[a] - obs.two_qubit_energy[b]) * t));
            }
        if (k % check_every == 0 || k == stepper.n)
            r.min_eigenvalue = std::min(r.min_eigenvalue, min_eigenvalue(full_state(model, v)));
    }
    r.final_state = full_state(model, v);

    const double h = stepper.h;
    r.p_h = trapezoid(r.flux_h, h);
    r.p_v = trapezoid(r.flux_v, h);
    r.p_s = r.p_h + r.p_v;
    r.p_cavity_total = trapezoid(flux_total_cav, h);
    r.cum_p_s.assign(r.times.size(), 0.0);
    for (std::size_t i = 1; i < r.times.size(); ++i)
        r.cum_p_s[i] = r.cum_p_s[i - 1] + 0.5 * h * (r.flux_h[i - 1] + r.flux_v[i - 1] + r.flux_h[i] + r.flux_v[i]);

    Mat4 rho2 = Mat4::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            std::vector<double> re(tq[a][b].size()), im(tq[a][b].size());
            for (std::size_t i = 0; i < re.size(); ++i) {
                re[i] = tq[a][b][i].real();
                im[i] = tq[a][b][i].imag();
            }
            rho2(a, b) = cd(trapezoid(re, h), trapezoid(im, h));
        }
    r.two_qubit_weight = rho2.trace().real();
    if (r.two_qubit_weight > 0) {
        r.has_two_qubit = true;
        r.two_qubit = rho2 / r.two_qubit_weight;
    }

    if (opt.estimate_reexcitation && r.p_s > 0 && model.liouville.l_return.norm() > 0) {
        // Drop the jumps back into |u>: the photons that remain were emitted without reexcitation.
        const Generator cond = make_generator(model, drive, opt, true);
        Stepper cs = make_stepper(cond, drive, opt);
        CVec w = model.liouville.rho0;
        std::vector<double> flux;
        for (long k = 0; k <= cs.n; ++k) {
            if (k > 0) cs.step(k - 1, w);
            flux.push_back(two_kext * (obs.n_h.cast<cd>().dot(w).real() + obs.n_v.cast<cd>().dot(w).real()));
        }
        r.reexcitation_fraction = 1.0 - trapezoid(flux, cs.h) / r.p_s;
    }
    return r;
}

EntanglementResult simulate_entanglement(const SystemModel& model, double rabi1, double rabi2,
                                         double detuning, double phase, double duration,
                                         const SimOptions& opt) {
    EntanglementResult out;
    const DriveConfig drive = rabi2 > 0 ? bichromatic_drive(model, rabi1, rabi2, detuning, phase, duration)
                                        : monochromatic_drive(rabi1, detuning, duration);
    out.sim = evolve(model, drive, opt);
    if (!out.sim.has_two_qubit) throw ComputationError("no photon emitted into the qubit subspace");
    out.state = out.sim.two_qubit;
    out.metrics = metrics(out.state);
    return out;
}

ReducedParams reduced_params(const SystemModel& model, double rabi, double detuning) {
    const auto& em = model.emitter;
    const SchemeRates s = v_scheme_rates(em, std::sqrt(0.5));
    ReducedParams p{};
    p.omega_eff = model.g_v * rabi / (2.0 * std::abs(detuning));
    p.gamma_eff = std::pow(rabi / (2.0 * detuning), 2) * em.gamma_total;
    p.kappa = model.kappa_ext + model.kappa_in;
    p.kappa_ext = model.kappa_ext;
    p.r_u = s.gamma_u / em.gamma_total;
    p.r_g = s.gamma_g / em.gamma_total;
    p.r_o = s.gamma_o / em.gamma_total;
    p.omega_over_delta = rabi / std::abs(detuning);
    return p;
}

ReducedResult reduced_model_evolve(const ReducedParams& p, double t_end, double sample_dt) {
    if (!(p.omega_eff >= 0 && p.kappa > 0 && p.kappa_ext >= 0 && p.kappa_ext <= p.kappa && p.gamma_eff >= 0))
        throw ValidationError("reduced model rates must be non-negative with kappa > 0");
    if (!(t_end > 0 && sample_dt > 0)) throw ValidationError("t_end and sample_dt must be > 0");
    // States: 0 |u,0>, 1 |g,1>, 2 |g,0>, 3 |o,0>.
    const int d = 4;
    auto unit = [d](int i, int j) {
        SpMat m(d, d);
        m.insert(i, j) = 1.0;
        return m;
    };
    SpMat h = p.omega_eff * (unit(1, 0) + unit(0, 1));
    SpMat l = comm(h);
    l += dissipator(std::sqrt(2.0 * p.kappa) * unit(2, 1));
    l += dissipator(std::sqrt(2.0 * p.gamma_eff * p.r_u) * unit(0, 0));
    l += dissipator(std::sqrt(2.0 * p.gamma_eff * p.r_g) * unit(2, 0));
    l += dissipator(std::sqrt(2.0 * p.gamma_eff * p.r_o) * unit(3, 0));
    const CMat ld = CMat(l);
    const long n = std::max<long>(1, static_cast<long>(std::ceil(t_end / sample_dt - 1e-9)));
    const double hstep = t_end / n;
    const CMat prop = (ld * hstep).exp();

    ReducedResult out;
    out.regime_ok = p.omega_over_delta <= 0.1;
    auto& r = out.sim;
    CVec v = CVec::Zero(d * d);
    v[0] = 1.0;
    for (long k = 0; k <= n; ++k) {
        if (k > 0) v = prop * v;
        const double pg1 = v[1 + d * 1].real();
        r.times.push_back(k * hstep);
        r.flux_v.push_back(2.0 * p.kappa_ext * pg1);
        r.flux_h.push_back(0.0);
        r.populations["u"].push_back(v[0].real());
        r.populations["g1"].push_back(pg1);
        r.max_trace_dev = std::max(r.max_trace_dev, std::abs((v[0] + v[5] + v[10] + v[15]).real() - 1.0));
    }
    r.p_v = trapezoid(r.flux_v, hstep);
    r.p_s = r.p_v;
    r.cum_p_s.assign(r.times.size(), 0.0);
    for (std::size_t i = 1; i < r.times.size(); ++i)
        r.cum_p_s[i] = r.cum_p_s[i - 1] + 0.5 * hstep * (r.flux_v[i - 1] + r.flux_v[i]);
    r.final_state = Eigen::Map<CMat>(v.data(), d, d);
    return out;
}

double wavepacket_duration(const SimResult& r, double lo, double hi) {
    if (r.cum_p_s.empty() || r.cum_p_s.back() <= 0) return 0.0;
    const double total = r.cum_p_s.back();
    auto crossing = [&](double frac) {
        const double target = frac * total;
        for (std::size_t i = 1; i < r.cum_p_s.size(); ++i)
            if (r.cum_p_s[i] >= target) {
                const double a = r.cum_p_s[i - 1], b = r.cum_p_s[i];
                const double f = b > a ? (target - a) / (b - a) : 0.0;
                return r.times[i - 1] + f * (r.times[i] - r.times[i - 1]);
            }
        return r.times.back();
    };
    return crossing(hi) - crossing(lo);
}

Resampled resample(const SimResult& r, double bin) {
    if (!(bin > 0)) throw ValidationError("bin width must be > 0");
    Resampled out;
    if (r.times.empty()) return out;
    const double t_end = r.times.back();
    const long n = static_cast<long>(std::floor(t_end / bin + 1e-9));
    std::vector<double> grid;
    for (long k = 0; k <= n; ++k) grid.push_back(std::min(k * bin, t_end));
    if (grid.back() < t_end * (1 - 1e-12)) grid.push_back(t_end);
    std::size_t j = 0;
    for (const double t : grid) {
        while (j + 1 < r.times.size() && r.times[j + 1] < t) ++j;
        const std::size_t j1 = std::min(j + 1, r.times.size() - 1);
        const double span = r.times[j1] - r.times[j];
        const double f = span > 0 ? std::clamp((t - r.times[j]) / span, 0.0, 1.0) : 0.0;
        auto lerp = [&](const std::vector<double>& y) { return y[j] + f * (y[j1] - y[j]); };
        out.t.push_back(t);
        out.flux_h.push_back(lerp(r.flux_h));
        out.flux_v.push_back(lerp(r.flux_v));
        out.cum.push_back(lerp(r.cum_p_s));
    }
    return out;
}

}  // namespace cpk
