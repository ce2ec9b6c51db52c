#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cpk {

using Mat4 = Eigen::Matrix4cd;

// Two-qubit ordering is ion (x) photon: index = 2*ion_bit + photon_bit, bit 0 being
// the +1 eigenstate of Z. With ion Z+ = g1 and photon Z+ = V the basis reads
// (g1V, g1H, g2V, g2H).
enum class Pauli { Z = 0, X = 1, Y = 2 };

struct Projector {
    Pauli photon_basis;
    Pauli ion_basis;
    std::string outcome;   // photon sign then ion sign, e.g. "+-"
    Mat4 op;
};

// Setting index b = 3*photon + ion; outcome index o follows the label order ++, +-, -+, --.
struct CountTable {
    std::array<std::array<double, 4>, 9> counts{};
    double attempts = 0;
    double window = 60e-6;        // s
    double background_rate = 0;   // 1/s
};

struct ReconResult {
    Mat4 rho;
    bool converged;
    int iterations;
    double log_likelihood;
};

struct StateMetrics {
    double fidelity;
    double theta;
    double purity;
    double bound_gap;  // sqrt(purity) - fidelity
};

struct BootstrapResult {
    StateMetrics estimate;
    double fidelity_mean, fidelity_std;
    double purity_mean, purity_std;
    int resamples;
    int failed;
    bool low_confidence;
};

std::string pauli_name(Pauli p);
Pauli parse_pauli(const std::string& s);
int outcome_index(const std::string& label);
std::string outcome_label(int o);

std::vector<Projector> measurement_set();
const Projector& projector(int setting, int outcome);

Mat4 target_state(double theta);  // |Psi(theta)><Psi(theta)|
Mat4 maximally_mixed();

// Linear inversion from per-basis frequencies, projected onto the physical set.
Mat4 linear_inversion(const CountTable& counts);
// Nearest physical state in the eigenvalue sense (simplex projection of the spectrum).
Mat4 project_physical(const Mat4& m);

ReconResult reconstruct(const CountTable& counts, int max_iter = 10000, double tol = 1e-10);

double fidelity(const Mat4& rho, double theta);
double purity(const Mat4& rho);
StateMetrics metrics(const Mat4& rho, std::optional<double> theta = std::nullopt);

BootstrapResult bootstrap(const CountTable& counts, int m = 200, std::uint64_t seed = 1);

// Bell-state fidelity once unpolarised background of weight w is mixed in.
double background_weight(double signal_per_attempt, double background_rate, double window);
double background_fidelity_limit(double signal_per_attempt, double background_rate, double window);

// Born probabilities and synthetic data.
std::array<std::array<double, 4>, 9> born_probabilities(const Mat4& rho);
CountTable expected_counts(const Mat4& rho, double shots_per_basis);
CountTable sample_counts(const Mat4& rho, int shots_per_basis, std::mt19937_64& rng);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cpk
