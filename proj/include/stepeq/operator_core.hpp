// operator_core.hpp: spectral calculus on small dense Hermitian operators
//
// Every matrix function (exponential, logarithm, fractional power) goes through
// the eigendecomposition computed once when a HermitianOperator is built.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace stepeq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPopulationFloor = 1e-300;

class HermitianOperator {
public:
    // Throws ValidationError unless entries is square and Hermitian within tol
    // (elementwise). The stored matrix is symmetrised exactly.
    explicit HermitianOperator(const Matrix& entries, double tol = kHermitianTolerance);

    static HermitianOperator zero(Index dim);

    Index dim() const { return entries_.rows(); }
    const Matrix& matrix() const { return entries_; }

    // Ascending eigenvalues and the matching unitary of column eigenvectors.
    const RealVector& eigenvalues() const { return eigenvalues_; }
    const Matrix& eigenvectors() const { return eigenvectors_; }

private:
    Matrix entries_;
    RealVector eigenvalues_;
    Matrix eigenvectors_;
};

struct GibbsState {
    RealVector populations;      // p_a, eigenbasis order
    RealVector log_populations;  // log p_a, computed without exponentiating
    RealVector energies;         // E_a
    Matrix basis;                // columns |E_a>
    double beta{1.0};
    double log_partition{0.0};   // log Z
    bool clamped{false};         // true if any population was raised to kPopulationFloor

    Index dim() const { return populations.size(); }
    Matrix density() const;
    double expectation(const Matrix& op) const;
};

// e^{-beta H}/Z. beta = 0 yields the maximally mixed state.
GibbsState gibbs_state(const HermitianOperator& h, double beta);

// Tr[rho (log rho - log sigma)] in nats.
double relative_entropy(const GibbsState& rho, const GibbsState& sigma);

// rho^s for s in [0, 1].
Matrix fractional_power(const GibbsState& rho, double s);

// Logarithmic mean (p - q)/(ln p - ln q) = int_0^1 p^s q^{1-s} ds.
double log_mean(double p, double q);

// |<E_a(rho)|E_b(sigma)>|^2
RealMatrix basis_overlaps(const GibbsState& rho, const GibbsState& sigma);

// Operator expressed in the eigenbasis of rho: U^dagger A U.
Matrix in_eigenbasis(const GibbsState& rho, const Matrix& op);

namespace pauli {
Matrix identity(Index dim = 2);
Matrix x();
Matrix y();
Matrix z();
} // namespace pauli

} // namespace stepeq
