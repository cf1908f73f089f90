// ising.hpp: transverse-field Ising chain H(h) = -J sum_j (x_j x_{j+1} + h z_j)
//
// Finite chains use anti-periodic fermion boundary conditions, so the modes
// are k = 2 pi (m + 1/2) / L, m = 0 .. L/2 - 1. Each (k, -k) pair lives on the
// occupation basis {|11>, |00>, |10>, |01>} with the even block
// [[E_k, -i Omega_k], [i Omega_k, -E_k]] and a zero odd block.

#pragma once

#include "stepeq/geometry.hpp"
#include "stepeq/noise.hpp"
#include "stepeq/predictor.hpp"

#include <cstddef>
#include <vector>

namespace stepeq {

struct IsingModel {
    double J{1.0};
    std::size_t L{0};   // even chain length; 0 is the thermodynamic limit
    double h0{0.0};
    double h1{5.0};
    double beta{1.0};

    bool infinite() const { return L == 0; }
    void validate() const;
};

struct ModeData {
    double k{0.0};
    double E{0.0};       // 2J (h - cos k)
    double Omega{0.0};   // 2J sin k
    double eps{0.0};     // J sqrt(h^2 + 1 - 2h cos k)
};

ModeData mode_data(const IsingModel& model, double k, double h);
std::vector<double> momentum_grid(const IsingModel& model);

// <sigma_z> per site.
double magnetisation(const IsingModel& model, double h);

// Per-mode y-covariance of dH/dh:
//   J^2 sech^2(beta eps) / (2 eps^2) [E^2 + Omega^2 cosh(2 beta eps (1 - 2y))]
// beta * int_0^1 dy of this kernel equals kernel_C.
double kernel_Cy(const IsingModel& model, double k, double y, double h);
// Same expression with a single power of sech, kept for comparison.
double kernel_Cy_printed(const IsingModel& model, double k, double y, double h);
// 2 beta J^4 / eps^2 (h - cos k)^2 sech^2(beta eps) + 2 J^4 / eps^3 sin^2 k tanh(beta eps)
double kernel_C(const IsingModel& model, double k, double h);

// Kubo metric per site for the control h: (1/L) sum_k C(k, h), or
// (1/2pi) int_0^pi C(k, h) dk in the thermodynamic limit.
double ising_metric(const IsingModel& model, double h);
MetricField ising_metric_field(const IsingModel& model);

// Fluctuation metric per site, beta Var(dH/dh) / L; the y = 0 kernel summed over modes.
double ising_fluctuation_metric(const IsingModel& model, double h);
MetricField ising_fluctuation_metric_field(const IsingModel& model);

// Linear path h0 -> h1.
Path ising_linear_path(const IsingModel& model, std::size_t resolution = kDefaultPathResolution);

// Per-site CGF K(lambda / L) of a field sequence h_0 .. h_N with Phi_n (finite L).
double ising_cgf(const IsingModel& model, const std::vector<double>& h, const std::vector<double>& phi,
                 double lambda);

// Per-site linear-response dissipation along the profile's path.
Prediction ising_wdiss(const MetricProfile& profile, std::size_t steps, const NoiseSet& noise);

HermitianOperator ising_mode_hamiltonian(const IsingModel& model, double k, double h);
GibbsState ising_mode_gibbs(const IsingModel& model, double k, double h);

// Exact dissipation of the whole chain (not per site) from per-mode
// relative-entropy chains.
double ising_mode_exact_wdiss(const IsingModel& model, const std::vector<double>& h);
// Per-mode exact CGF summed over modes (whole chain).
double ising_mode_cgf(const IsingModel& model, const std::vector<double>& h, double lambda);

// Dense 2^L spin Hamiltonian; the closing bond carries the fermion parity
// so that the spectrum matches the anti-periodic mode decomposition.
Matrix ising_spin_hamiltonian(const IsingModel& model, double h);
// Exact dissipation of the whole chain from the 2^L Hamiltonians (L <= 8).
double ising_bruteforce_wdiss(const IsingModel& model, const std::vector<double>& h);

inline constexpr std::size_t kBruteForceMaxL = 8;

} // namespace stepeq
