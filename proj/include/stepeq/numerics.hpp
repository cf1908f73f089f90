// numerics.hpp: quadrature, finite differences and deterministic summation

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stepeq::numerics {

using ScalarFunction = std::function<double(double)>;

// Adaptive Gauss-Kronrod (15-point pairs). Throws ToleranceError when the
// error estimate exceeds rel_tol * |I| + abs_tol.
double integrate_adaptive(const ScalarFunction& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 1e-300,
                          const char* context = "integrate_adaptive");

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

// n-point rule; computed once per n and cached.
const GaussLegendreRule& gauss_legendre(std::size_t n);

// Fixed n-point Gauss-Legendre on [a, b].
double integrate_gauss_legendre(const ScalarFunction& f, double a, double b, std::size_t n);

// Doubles the node count from n0 until successive estimates agree to rel_tol.
double integrate_gauss_legendre_doubling(const ScalarFunction& f, double a, double b,
                                         std::size_t n0 = 512, double rel_tol = 1e-10,
                                         std::size_t n_max = 1u << 15);

// Derivative of order 1 or 2 at x0 from central differences refined by Richardson
// extrapolation, starting at step h0 and halving.
double richardson_derivative(const ScalarFunction& f, double x0, int order,
                             double h0 = 0.0625, int levels = 6);

// Pairwise summation in index order; result is independent of thread count.
double pairwise_sum(std::span<const double> values);

// Logarithmically spaced integers in [lo, hi], strictly increasing, both ends kept.
std::vector<long> log_spaced_integers(long lo, long hi, std::size_t count);

} // namespace stepeq::numerics
