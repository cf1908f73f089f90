// operator_core.cpp: Hermitian eigendecomposition, Gibbs states, relative entropy

#include "stepeq/operator_core.hpp"
#include "stepeq/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>
#include <limits>
#include <string>

namespace stepeq {

namespace {

// Closed-form decomposition of [[a, b], [conj(b), d]] with ascending eigenvalues.
void eigen_2x2(const Matrix& h, RealVector& evals, Matrix& evecs)
{
    const double a = h(0, 0).real();
    const double d = h(1, 1).real();
    const Complex b = h(0, 1);
    const double mean = 0.5 * (a + d);
    const double half_gap = 0.5 * (a - d);
    const double r = std::hypot(half_gap, std::abs(b));

    evals.resize(2);
    evecs.resize(2, 2);
    evals(0) = mean - r;
    evals(1) = mean + r;

    if (std::abs(b) == 0.0) {
        evecs.setZero();
        if (a <= d) {
            evecs(0, 0) = 1.0;
            evecs(1, 1) = 1.0;
        } else {
            evecs(1, 0) = 1.0;
            evecs(0, 1) = 1.0;
        }
        return;
    }

    // Pick the algebraically equivalent vector that avoids cancellation.
    Eigen::Vector2cd lower;
    Eigen::Vector2cd upper;
    if (half_gap >= 0.0) {
        lower << b, Complex(-half_gap - r, 0.0);
        upper << Complex(half_gap + r, 0.0), std::conj(b);
    } else {
        lower << Complex(half_gap - r, 0.0), std::conj(b);
        upper << b, Complex(r - half_gap, 0.0);
    }
    evecs.col(0) = lower.normalized();
    evecs.col(1) = upper.normalized();
}

} // namespace

HermitianOperator::HermitianOperator(const Matrix& entries, double tol)
{
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
        throw ValidationError("HermitianOperator: matrix must be square and non-empty");
    }
    if (!entries.allFinite()) {
        throw ValidationError("HermitianOperator: non-finite entries");
    }
    const double deviation = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (deviation > tol) {
        throw ValidationError("HermitianOperator: matrix is not Hermitian (max |A - A^H| = "
                              + std::to_string(deviation) + ")");
    }
    entries_ = 0.5 * (entries + entries.adjoint());

    if (entries_.rows() == 1) {
        eigenvalues_ = RealVector::Constant(1, entries_(0, 0).real());
        eigenvectors_ = Matrix::Identity(1, 1);
    } else if (entries_.rows() == 2) {
        eigen_2x2(entries_, eigenvalues_, eigenvectors_);
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_);
        if (solver.info() != Eigen::Success) {
            throw ValidationError("HermitianOperator: eigendecomposition failed");
        }
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    }
}

HermitianOperator HermitianOperator::zero(Index dim)
{
    return HermitianOperator(Matrix::Zero(dim, dim));
}

Matrix GibbsState::density() const
{
    return basis * populations.cast<Complex>().asDiagonal() * basis.adjoint();
}

double GibbsState::expectation(const Matrix& op) const
{
    const Matrix rotated = basis.adjoint() * op * basis;
    double total = 0.0;
    for (Index a = 0; a < dim(); ++a) total += populations(a) * rotated(a, a).real();
    return total;
}

GibbsState gibbs_state(const HermitianOperator& h, double beta)
{
    if (!std::isfinite(beta)) throw DomainError("gibbs_state: beta must be finite");
    if (beta < 0.0) throw DomainError("gibbs_state: beta must be non-negative");
    if (h.dim() < 2) throw ValidationError("gibbs_state: dimension must be at least 2");

    GibbsState state;
    state.beta = beta;
    state.energies = h.eigenvalues();
    state.basis = h.eigenvectors();

    const Index n = h.dim();
    const double ground = state.energies.minCoeff();
    RealVector exponents(n);
    for (Index a = 0; a < n; ++a) exponents(a) = -beta * (state.energies(a) - ground);
    double sum = 0.0;
    for (Index a = 0; a < n; ++a) sum += std::exp(exponents(a));
    const double log_sum = std::log(sum);

    state.log_partition = log_sum - beta * ground;
    state.log_populations.resize(n);
    state.populations.resize(n);
    for (Index a = 0; a < n; ++a) {
        double log_p = exponents(a) - log_sum;
        double p = std::exp(log_p);
        if (!(p >= kPopulationFloor)) {
            p = kPopulationFloor;
            log_p = std::log(kPopulationFloor);
            state.clamped = true;
        }
        state.populations(a) = p;
        state.log_populations(a) = log_p;
    }
    return state;
}

RealMatrix basis_overlaps(const GibbsState& rho, const GibbsState& sigma)
{
    if (rho.dim() != sigma.dim()) throw ValidationError("basis_overlaps: dimension mismatch");
    return (rho.basis.adjoint() * sigma.basis).cwiseAbs2();
}

Matrix in_eigenbasis(const GibbsState& rho, const Matrix& op)
{
    if (op.rows() != rho.dim() || op.cols() != rho.dim()) {
        throw ValidationError("in_eigenbasis: dimension mismatch");
    }
    return rho.basis.adjoint() * op * rho.basis;
}

double relative_entropy(const GibbsState& rho, const GibbsState& sigma)
{
    if (rho.dim() != sigma.dim()) throw ValidationError("relative_entropy: dimension mismatch");
    if (rho.clamped || sigma.clamped) {
        throw DegenerateStateError("relative_entropy: state is rank deficient (population below 1e-300)");
    }
    const RealMatrix overlaps = basis_overlaps(rho, sigma);
    double total = 0.0;
    for (Index a = 0; a < rho.dim(); ++a) {
        double row = 0.0;
        for (Index b = 0; b < sigma.dim(); ++b) {
            row += overlaps(a, b) * (rho.log_populations(a) - sigma.log_populations(b));
        }
        total += rho.populations(a) * row;
    }
    return total;
}

Matrix fractional_power(const GibbsState& rho, double s)
{
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("fractional_power: exponent must lie in [0, 1]");
    if (s == 0.0) return Matrix::Identity(rho.dim(), rho.dim());
    RealVector powered(rho.dim());
    for (Index a = 0; a < rho.dim(); ++a) powered(a) = std::exp(s * rho.log_populations(a));
    return rho.basis * powered.cast<Complex>().asDiagonal() * rho.basis.adjoint();
}

double log_mean(double p, double q)
{
    if (!(p > 0.0) || !(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
        throw DomainError("log_mean: arguments must be positive and finite");
    }
    if (p < q) std::swap(p, q);
    if (p - q <= 1e-12 * p) return 0.5 * (p + q);
    const double x = std::log(p / q);
    // q (e^x - 1)/x, accurate as x -> 0
    return q * std::expm1(x) / x;
}

namespace pauli {

Matrix identity(Index dim) { return Matrix::Identity(dim, dim); }

Matrix x()
{
    Matrix m(2, 2);
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

Matrix y()
{
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0),
         Complex(0.0, 1.0), 0.0;
    return m;
}

Matrix z()
{
    Matrix m(2, 2);
    m << 1.0, 0.0,
         0.0, -1.0;
    return m;
}

} // namespace pauli

} // namespace stepeq
