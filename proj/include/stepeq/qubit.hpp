// qubit.hpp: polaron-dressed Landau-Zener qubit

#pragma once

#include "stepeq/geometry.hpp"

namespace stepeq {

struct QubitModel {
    double delta{1.0};     // bare tunnelling
    double omega0{-5.0};   // splitting at t = 0
    double omega1{5.0};    // splitting at t = 1
    double alpha{0.5};     // system-bath coupling
    double omega_c{1.0};   // spectral cutoff
    double beta{1.0};

    void validate() const;
};

// exp(-2 int_0^inf J(w) coth(beta w / 2) / w^2 dw), J(w) = alpha e^{-w/wc} w^3 / wc^2.
// Cached per (alpha, beta, omega_c).
double gamma_renorm(double alpha, double beta, double omega_c);
double gamma_renorm(const QubitModel& model);

// (omega sigma_z + delta gamma sigma_x) / 2
HermitianOperator polaron_hamiltonian(const QubitModel& model, double omega);

// One control v = omega with V = sigma_z / 2 and offset delta gamma sigma_x / 2.
ControlSchedule landau_zener_schedule(const QubitModel& model, std::size_t resolution = kDefaultPathResolution);

} // namespace stepeq
