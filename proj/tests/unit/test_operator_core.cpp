#include <doctest.h>

#include "../support/oracles.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/operator_core.hpp"

#include <cmath>
#include <random>

using namespace stepeq;

namespace {

GibbsState diag_state(double p0, double p1)
{
    // beta = 1 Hamiltonian with populations (p0, p1)
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = -std::log(p0);
    h(1, 1) = -std::log(p1);
    return gibbs_state(HermitianOperator(h), 1.0);
}

} // namespace

TEST_CASE("hermitian operator rejects non-hermitian and non-square input")
{
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(HermitianOperator{a}, ValidationError);
    CHECK_THROWS_AS(HermitianOperator{Matrix::Zero(2, 3)}, ValidationError);
}

TEST_CASE("eigenvectors are unitary and reconstruct the matrix")
{
    std::mt19937_64 rng(11);
    for (int dim : {2, 3, 4, 8}) {
        const Matrix a = oracle::random_hermitian(rng, dim);
        const HermitianOperator op(a);
        const Matrix& u = op.eigenvectors();
        CHECK((u.adjoint() * u - Matrix::Identity(dim, dim)).norm() < 1e-10);
        const Matrix back = u * op.eigenvalues().cast<Complex>().asDiagonal() * u.adjoint();
        CHECK((back - a).norm() < 1e-10);
    }
}

TEST_CASE("gibbs populations for the simple cases")
{
    SUBCASE("zero hamiltonian is maximally mixed")
    {
        const auto s = gibbs_state(HermitianOperator::zero(2), 1.0);
        CHECK(s.populations(0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(s.populations(1) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("diag(-E, E) with beta E = ln 3")
    {
        const double e = std::log(3.0);
        Matrix h = Matrix::Zero(2, 2);
        h(0, 0) = -e;
        h(1, 1) = e;
        const auto s = gibbs_state(HermitianOperator(h), 1.0);
        CHECK(std::abs(s.populations(0) - 0.9) < 1e-14);
        CHECK(std::abs(s.populations(1) - 0.1) < 1e-14);
        CHECK(std::abs(s.log_partition - std::log(10.0 / 3.0)) < 1e-14);
    }
    SUBCASE("(z + x)/2 against the dense exponential")
    {
        const Matrix h = (pauli::z() + pauli::x()) / 2.0;
        const auto s = gibbs_state(HermitianOperator(h), 1.0);
        const double z = 2.0 * std::cosh(1.0 / std::sqrt(2.0));
        CHECK(std::abs(s.populations(0) - std::exp(1.0 / std::sqrt(2.0)) / z) < 1e-14);
        CHECK((s.density() - oracle::dense_gibbs(h, 1.0)).norm() < 1e-13);
    }
}

TEST_CASE("gibbs state errors")
{
    CHECK_THROWS_AS(gibbs_state(HermitianOperator::zero(2), std::nan("")), DomainError);
    CHECK_THROWS_AS(gibbs_state(HermitianOperator::zero(1), 1.0), ValidationError);
}

TEST_CASE("gibbs invariants on random operators")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 2 + trial % 4;
        const HermitianOperator h(oracle::random_hermitian(rng, dim, 2.0));
        const auto s = gibbs_state(h, 0.7);
        CHECK(std::abs(s.populations.sum() - 1.0) < 1e-12);
        CHECK(s.populations.minCoeff() > 0.0);
        const Matrix rho = s.density();
        CHECK((rho - rho.adjoint()).norm() < 1e-14);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
        // re-diagonalising the density reproduces the populations
        const HermitianOperator again(rho);
        RealVector sorted = s.populations;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        CHECK((again.eigenvalues() - sorted).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((s.density() - oracle::dense_gibbs(h.matrix(), 0.7)).norm() < 1e-12);
    }
}

TEST_CASE("large beta clamps and reports")
{
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    const auto s = gibbs_state(HermitianOperator(h), 1e4);
    CHECK(s.clamped);
    CHECK_THROWS_AS(relative_entropy(s, s), DegenerateStateError);
}

TEST_CASE("relative entropy")
{
    const auto rho = diag_state(0.9, 0.1);
    const auto mixed = diag_state(0.5, 0.5);
    CHECK(std::abs(relative_entropy(rho, rho)) < 1e-12);
    CHECK(relative_entropy(rho, mixed)
          == doctest::Approx(0.9 * std::log(1.8) + 0.1 * std::log(0.2)).epsilon(1e-13));

    const auto a = gibbs_state(HermitianOperator(pauli::z()), 1.0);
    const auto b = gibbs_state(HermitianOperator(pauli::x()), 1.0);
    const double expected = oracle::dense_relative_entropy(oracle::dense_gibbs(pauli::z(), 1.0),
                                                           oracle::dense_gibbs(pauli::x(), 1.0));
    CHECK(relative_entropy(a, b) > 0.0);
    CHECK(std::abs(relative_entropy(a, b) - expected) < 1e-10);

    CHECK_THROWS_AS(relative_entropy(a, gibbs_state(HermitianOperator::zero(3), 1.0)), ValidationError);
}

TEST_CASE("relative entropy is non-negative and reduces to KL when commuting")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const HermitianOperator h1(oracle::random_hermitian(rng, 3));
        const HermitianOperator h2(oracle::random_hermitian(rng, 3));
        CHECK(relative_entropy(gibbs_state(h1, 1.3), gibbs_state(h2, 1.3)) >= -1e-12);

        const double p = u(rng);
        const double q = u(rng);
        const auto r = diag_state(p / (1 + p), 1 / (1 + p));
        const auto s = diag_state(q / (1 + q), 1 / (1 + q));
        const double r0 = p / (1 + p);
        const double s0 = q / (1 + q);
        const double kl = r0 * std::log(r0 / s0) + (1 - r0) * std::log((1 - r0) / (1 - s0));
        CHECK(std::abs(relative_entropy(r, s) - kl) < 1e-12);
    }
}

TEST_CASE("fractional power")
{
    const auto rho = diag_state(0.9, 0.1);
    CHECK((fractional_power(rho, 0.0) - Matrix::Identity(2, 2)).norm() < 1e-14);
    CHECK((fractional_power(rho, 1.0) - rho.density()).norm() < 1e-14);
    const Matrix half = fractional_power(rho, 0.5);
    CHECK(std::abs(half(0, 0).real() - 0.948683298050514) < 1e-12);
    CHECK(std::abs(half(1, 1).real() - 0.316227766016838) < 1e-12);
    CHECK_THROWS_AS(fractional_power(rho, 1.5), DomainError);

    const auto b = gibbs_state(HermitianOperator((pauli::z() + pauli::x()) / 2.0), 1.0);
    const Matrix sqrt_oracle = b.density().sqrt();
    CHECK((fractional_power(b, 0.5) - sqrt_oracle).norm() < 1e-12);
}

TEST_CASE("logarithmic mean")
{
    CHECK(log_mean(0.3, 0.3) == 0.3);
    CHECK(log_mean(1.0, std::exp(-2.0)) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(log_mean(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(log_mean(-1.0, 1.0), DomainError);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> e(-30.0, 0.0);
    for (int i = 0; i < 200; ++i) {
        const double p = std::exp(e(rng));
        const double q = i % 10 == 0 ? p * (1.0 + 1e-13) : std::exp(e(rng));
        const double m = log_mean(p, q);
        CHECK(m == log_mean(q, p));
        CHECK(m >= std::min(p, q) * (1 - 1e-15));
        CHECK(m <= std::max(p, q) * (1 + 1e-15));
    }
    // integral definition
    const double p = 0.8;
    const double q = 0.05;
    const double quad = oracle::simpson([&](double s) { return std::pow(p, s) * std::pow(q, 1 - s); }, 0, 1, 2000);
    CHECK(std::abs(log_mean(p, q) - quad) < 1e-12);
}
