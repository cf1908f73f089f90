// oracles.hpp: brute-force reference routines used only by the tests.
// These go through Eigen's general matrix functions rather than the library's
// spectral calculus, so agreement is a genuine cross-check.

#pragma once

#include "stepeq/operator_core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using stepeq::Complex;
using stepeq::Matrix;

inline Matrix dense_gibbs(const Matrix& h, double beta)
{
    const Matrix shifted = h - Matrix::Identity(h.rows(), h.cols()) * h.diagonal().real().minCoeff();
    Matrix rho = (-beta * shifted).exp();
    rho /= rho.trace();
    return rho;
}

inline double dense_relative_entropy(const Matrix& rho, const Matrix& sigma)
{
    const Matrix diff = rho.log() - sigma.log();
    return (rho * diff).trace().real();
}

inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double sum = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) sum += f(a + i * h);
    return sum * h;
}

// Composite Simpson with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a(i, j) = Complex(normal(rng), normal(rng));
    }
    return (a + a.adjoint()) / 2.0;
}

} // namespace oracle
