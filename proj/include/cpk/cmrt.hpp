#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "cpk/atomic.hpp"
#include "cpk/cavity.hpp"
#include "cpk/ode.hpp"
#include "cpk/tomography.hpp"

namespace cpk {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;
using CMat = Eigen::MatrixXcd;

enum class SimMethod { Propagator, RungeKutta };

struct SimOptions {
    int n_max = 1;
    double jitter_rate = 2.0 * 3.14159265358979323846 * 10e3;  // rad/s, D5/2 dephasing
    bool light_shift_compensation = true;
    double sample_dt = 20e-9;      // s, quadrature grid for constant drives
    int period_slices = 64;        // Magnus slices per drive period (bichromatic)
    int period_samples = 4;        // quadrature samples per drive period
    SimMethod method = SimMethod::Propagator;
    OdeOptions ode;
    double check_interval = 1e-6;  // s, spacing of positivity checks
    bool estimate_reexcitation = true;
};

struct DriveComponent {
    double rabi;      // rad/s
    double detuning;  // rad/s, laser minus P3/2 transition (negative = red)
    double phase;     // rad
};

struct DriveConfig {
    std::vector<DriveComponent> components;
    double duration;  // s
    std::string polarization = "sigma-";
    double total_rabi() const;
};

struct BasisState {
    int level;
    int n_h;
    int n_v;
};

struct CollapseOp {
    std::string kind;  // spontaneous, cavity_ext, cavity_in, dephasing
    double rate;       // rad/s; operator is sqrt(2 rate) times a unit-normalised jump
    SpMat op;
    bool returns_to_initial = false;
};

// Generator pieces restricted to the Liouville coordinates reachable from the
// initial state. The full space is 18^2 (n_max+1)^4; the reachable part is ~150.
struct ReducedLiouvillian {
    std::vector<long long> index;  // full vec(rho) index, column-major
    CMat l_static;   // Zeeman + cavity coupling + all dissipators
    CMat l_p32;      // -i[P_{P3/2}, .]
    CMat l_d52;      // -i[P_{D5/2}, .]
    CMat l_raise;    // -i[R, .]
    CMat l_lower;    // -i[R^dagger, .]
    CMat l_return;   // jump part of channels back into the initial state
    Eigen::VectorXcd rho0;
};

struct SystemModel {
    EmitterModel emitter;
    CavityModel cavity;
    int n_max;
    int dim;
    std::vector<Sublevel> levels;
    std::vector<BasisState> basis;
    Sublevel initial{Term::S12, -1};
    Sublevel excited{Term::P32, -3};
    Sublevel g1{Term::D52, -5};
    Sublevel g2{Term::D52, -3};
    std::vector<double> level_energy;  // Zeeman part in the rotating frame, rad/s
    SpMat h_static;     // Zeeman + cavity coupling
    SpMat proj_p32;
    SpMat proj_d52;
    SpMat drive_raise;  // sum over S1/2 of (CG/CG_ref)/2 |P3/2 m-1><S1/2 m|
    SpMat num_h;
    SpMat num_v;
    std::vector<CollapseOp> collapse;
    double g_v;  // |coupling| of the e -> g1 channel into V
    double g_h;  // |coupling| of the e -> g2 channel into H
    double kappa_ext;
    double kappa_in;
    ReducedLiouvillian liouville;

    int level_index(Sublevel s) const;
    int index(int level, int n_h, int n_v) const;
};

struct SimResult {
    std::vector<double> times;
    std::vector<double> flux_h;   // 2 kappa_ext <n_H>, 1/s
    std::vector<double> flux_v;
    std::vector<double> cum_p_s;
    std::map<std::string, std::vector<double>> populations;
    double p_h = 0, p_v = 0, p_s = 0;
    double p_cavity_total = 0;     // includes intracavity loss
    double max_trace_dev = 0;
    double min_eigenvalue = 0;
    int reduced_dim = 0;
    CMat final_state;
    double reexcitation_fraction = -1;  // < 0 when not estimated
    bool has_two_qubit = false;
    Mat4 two_qubit;                // normalised, basis (g1V, g1H, g2V, g2H)
    double two_qubit_weight = 0;   // trace before normalisation
};

struct EntanglementResult {
    SimResult sim;
    Mat4 state;
    StateMetrics metrics;
};

struct ReducedParams {
    double omega_eff;   // rad/s
    double kappa;
    double kappa_ext;
    double gamma_eff;
    double r_u;
    double r_g;
    double r_o;
    double omega_over_delta = 0;  // for the regime flag only
};

struct ReducedResult {
    SimResult sim;
    bool regime_ok;
};

void validate(const SimOptions& opt);

SystemModel build_system(const EmitterModel& em, const CavityModel& cav, const SimOptions& opt,
                         const std::string& polarization = "sigma-");

// Raman light shift of the initial state, compensated by shifting the D5/2 manifold.
double light_shift(const DriveConfig& drive);

DriveConfig monochromatic_drive(double rabi, double detuning, double duration);
// Second component is blue-shifted by the D5/2 Zeeman splitting so it is Raman
// resonant with g2 and an H photon.
DriveConfig bichromatic_drive(const SystemModel& model, double rabi1, double rabi2, double detuning,
                              double phase, double duration);

SimResult evolve(const SystemModel& model, const DriveConfig& drive, const SimOptions& opt);

EntanglementResult simulate_entanglement(const SystemModel& model, double rabi1, double rabi2,
                                         double detuning, double phase, double duration,
                                         const SimOptions& opt);

ReducedParams reduced_params(const SystemModel& model, double rabi, double detuning);
ReducedResult reduced_model_evolve(const ReducedParams& p, double t_end, double sample_dt = 20e-9);

// Time between the lo and hi fractions of the final cumulative output.
double wavepacket_duration(const SimResult& r, double lo = 0.1, double hi = 0.9);

// Linear interpolation of flux and cumulative probability on a regular output grid.
struct Resampled {
    std::vector<double> t;
    std::vector<double> flux_h;
    std::vector<double> flux_v;
    std::vector<double> cum;
};
Resampled resample(const SimResult& r, double bin);

}  // namespace cpk
