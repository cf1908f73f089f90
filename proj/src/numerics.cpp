// numerics.cpp: quadrature rules and finite-difference helpers

#include "stepeq/numerics.hpp"
#include "stepeq/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace stepeq::numerics {

double integrate_adaptive(const ScalarFunction& f, double a, double b,
                          double rel_tol, double abs_tol, const char* context)
{
    if (a == b) return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 20, rel_tol, &error, &l1);
    if (!std::isfinite(value)) {
        throw ToleranceError(std::string(context) + ": non-finite integral");
    }
    // The Kronrod estimate is pessimistic; accept within a small safety factor.
    // Integrals that cancel to near zero are judged against a fraction of the
    // L1 norm instead.
    if (error > 10.0 * rel_tol * std::max(std::abs(value), 1e-2 * l1) + abs_tol) {
        throw ToleranceError(std::string(context) + ": quadrature error estimate "
                             + std::to_string(error) + " above tolerance");
    }
    return value;
}

const GaussLegendreRule& gauss_legendre(std::size_t n)
{
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<GaussLegendreRule>> cache;

    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;

    if (n == 0) throw DomainError("gauss_legendre: need at least one node");
    auto rule = std::make_unique<GaussLegendreRule>();
    // boost returns the non-negative zeros in ascending order
    const std::vector<double> half = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
    std::vector<double> nodes;
    nodes.reserve(n);
    for (auto it2 = half.rbegin(); it2 != half.rend(); ++it2) {
        if (*it2 != 0.0) nodes.push_back(-*it2);
    }
    for (double x : half) nodes.push_back(x);
    for (double x : nodes) {
        const double dp = boost::math::legendre_p_prime(static_cast<int>(n), x);
        rule->weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    }
    rule->nodes = std::move(nodes);
    auto& ref = *rule;
    cache.emplace(n, std::move(rule));
    return ref;
}

double integrate_gauss_legendre(const ScalarFunction& f, double a, double b, std::size_t n)
{
    const auto& rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::vector<double> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        terms[i] = rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * pairwise_sum(terms);
}

double integrate_gauss_legendre_doubling(const ScalarFunction& f, double a, double b,
                                         std::size_t n0, double rel_tol, std::size_t n_max)
{
    double previous = integrate_gauss_legendre(f, a, b, n0);
    for (std::size_t n = 2 * n0; n <= n_max; n *= 2) {
        const double current = integrate_gauss_legendre(f, a, b, n);
        if (std::abs(current - previous) <= rel_tol * std::abs(current)
            || std::abs(current - previous) < 1e-300) {
            return current;
        }
        previous = current;
    }
    throw ToleranceError("integrate_gauss_legendre_doubling: no convergence up to "
                         + std::to_string(n_max) + " nodes");
}

double richardson_derivative(const ScalarFunction& f, double x0, int order, double h0, int levels)
{
    if (order != 1 && order != 2) throw DomainError("richardson_derivative: order must be 1 or 2");
    if (levels < 1) throw DomainError("richardson_derivative: levels must be positive");
    const double f0 = order == 2 ? f(x0) : 0.0;
    auto central = [&](double h) {
        if (order == 1) return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        return (f(x0 + h) - 2.0 * f0 + f(x0 - h)) / (h * h);
    };

    std::vector<std::vector<double>> table(static_cast<std::size_t>(levels));
    double best = 0.0;
    double best_error = std::numeric_limits<double>::infinity();
    double h = h0;
    for (int i = 0; i < levels; ++i, h *= 0.5) {
        auto& row = table[static_cast<std::size_t>(i)];
        row.push_back(central(h));
        double factor = 4.0;
        for (int j = 1; j <= i; ++j, factor *= 4.0) {
            const auto& prev = table[static_cast<std::size_t>(i - 1)];
            const double value = row[static_cast<std::size_t>(j - 1)]
                + (row[static_cast<std::size_t>(j - 1)] - prev[static_cast<std::size_t>(j - 1)]) / (factor - 1.0);
            const double error = std::max(std::abs(value - row[static_cast<std::size_t>(j - 1)]),
                                          std::abs(value - prev[static_cast<std::size_t>(j - 1)]));
            row.push_back(value);
            if (error <= best_error) {
                best_error = error;
                best = value;
            }
        }
        if (i == 0) best = row[0];
    }
    return best;
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double total = 0.0;
        for (double v : values) total += v;
        return total;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<long> log_spaced_integers(long lo, long hi, std::size_t count)
{
    if (lo < 1 || hi < lo) throw DomainError("log_spaced_integers: need 1 <= lo <= hi");
    if (count < 2 || lo == hi) return {lo};
    std::vector<long> out;
    const double ratio = std::log(static_cast<double>(hi) / static_cast<double>(lo));
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        const long v = std::lround(static_cast<double>(lo) * std::exp(ratio * t));
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    out.back() = hi;
    return out;
}

} // namespace stepeq::numerics
