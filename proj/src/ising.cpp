// ising.cpp: momentum-space TFIM and its dense spin-chain oracle

#include "stepeq/ising.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <utility>

namespace stepeq {

namespace {

constexpr double kPi = std::numbers::pi;

// sech^2(x) cosh(z) for x >= 0, without overflow
double sech2_cosh(double x, double z)
{
    z = std::abs(z);
    const double q = std::exp(-2.0 * x);
    return 2.0 * (std::exp(z - 2.0 * x) + std::exp(-z - 2.0 * x)) / ((1.0 + q) * (1.0 + q));
}

// Near h = 1 the integrand has structure of width |1 - h| and 1/(beta J)
// at k -> 0, so [0, pi] is cut into panels halving towards k = 0.
double k_integral(const std::function<double(double)>& f)
{
    constexpr int panels = 40;
    auto composite = [&](std::size_t nodes) {
        std::vector<double> parts;
        parts.reserve(panels);
        double scale = 0.0;
        double hi = kPi;
        for (int j = 0; j < panels; ++j) {
            const double lo = j == panels - 1 ? 0.0 : hi / 2.0;
            parts.push_back(numerics::integrate_gauss_legendre(f, lo, hi, nodes));
            scale += std::abs(parts.back());
            hi = lo;
        }
        return std::pair{numerics::pairwise_sum(parts), scale};
    };
    double previous = composite(8).first;
    for (std::size_t nodes = 16; nodes <= 1024; nodes *= 2) {
        const auto [current, scale] = composite(nodes);
        if (std::abs(current - previous) <= 1e-10 * std::max(std::abs(current), scale)) return current;
        previous = current;
    }
    throw ToleranceError("ising k-integral: no convergence up to 1024 nodes per panel");
}

std::vector<GibbsState> mode_chain(const IsingModel& model, double k, const std::vector<double>& h)
{
    std::vector<GibbsState> states;
    states.reserve(h.size());
    for (double hn : h) states.push_back(ising_mode_gibbs(model, k, hn));
    return states;
}

// kernel_Cy continued to y slightly outside [0, 1] for CGF derivatives at lambda = 0
double cy_unchecked(const IsingModel& model, double k, double y, double h)
{
    const ModeData m = mode_data(model, k, h);
    const double x = model.beta * m.eps;
    const double pref = model.J * model.J / (2.0 * m.eps * m.eps);
    return pref * (m.E * m.E * sech2_cosh(x, 0.0) + m.Omega * m.Omega * sech2_cosh(x, 2.0 * x * (1.0 - 2.0 * y)));
}

void require_finite(const IsingModel& model, const char* what)
{
    if (model.infinite()) throw DomainError(std::string(what) + ": requires a finite chain length");
}

} // namespace

void IsingModel::validate() const
{
    if (!(J > 0.0) || !std::isfinite(J)) throw DomainError("ising: J must be positive");
    if (!infinite() && L % 2 != 0) throw DomainError("ising: L must be even");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("ising: beta must be finite and non-negative");
    if (!std::isfinite(h0) || !std::isfinite(h1)) throw DomainError("ising: field endpoints must be finite");
}

ModeData mode_data(const IsingModel& model, double k, double h)
{
    ModeData m;
    m.k = k;
    // h - cos k and h^2 + 1 - 2h cos k written without cancellation near h = 1, k = 0
    const double s2 = std::sin(k / 2.0) * std::sin(k / 2.0);
    m.E = 2.0 * model.J * ((h - 1.0) + 2.0 * s2);
    m.Omega = 2.0 * model.J * std::sin(k);
    m.eps = model.J * std::sqrt(std::max(0.0, (h - 1.0) * (h - 1.0) + 4.0 * h * s2));
    return m;
}

std::vector<double> momentum_grid(const IsingModel& model)
{
    require_finite(model, "momentum_grid");
    model.validate();
    std::vector<double> k(model.L / 2);
    for (std::size_t m = 0; m < k.size(); ++m) {
        k[m] = 2.0 * kPi * (static_cast<double>(m) + 0.5) / static_cast<double>(model.L);
    }
    return k;
}

double magnetisation(const IsingModel& model, double h)
{
    model.validate();
    auto term = [&](double k) {
        const ModeData m = mode_data(model, k, h);
        if (m.eps == 0.0) return 0.0;
        return m.E / m.eps * std::tanh(model.beta * m.eps);
    };
    if (model.infinite()) return k_integral(term) / (2.0 * kPi);
    std::vector<double> terms;
    for (double k : momentum_grid(model)) terms.push_back(term(k));
    return numerics::pairwise_sum(terms) / static_cast<double>(model.L);
}

double kernel_Cy(const IsingModel& model, double k, double y, double h)
{
    if (!(y >= 0.0 && y <= 1.0)) throw DomainError("kernel_Cy: y must lie in [0, 1]");
    return cy_unchecked(model, k, y, h);
}

double kernel_Cy_printed(const IsingModel& model, double k, double y, double h)
{
    if (!(y >= 0.0 && y <= 1.0)) throw DomainError("kernel_Cy_printed: y must lie in [0, 1]");
    const ModeData m = mode_data(model, k, h);
    const double x = model.beta * m.eps;
    const double z = std::abs(2.0 * x * (1.0 - 2.0 * y));
    // sech(x) = 2 e^{-x} / (1 + e^{-2x}); sech(x) cosh(z) in log space
    const double log_sech = std::log(2.0) - x - std::log1p(std::exp(-2.0 * x));
    const double sech_cosh = std::exp(log_sech + z + std::log1p(std::exp(-2.0 * z)) - std::log(2.0));
    const double pref = model.J * model.J / (2.0 * m.eps * m.eps);
    return pref * (m.E * m.E * std::exp(log_sech) + m.Omega * m.Omega * sech_cosh);
}

double kernel_C(const IsingModel& model, double k, double h)
{
    const ModeData m = mode_data(model, k, h);
    const double x = model.beta * m.eps;
    const double j4 = std::pow(model.J, 4);
    const double c = m.E / (2.0 * model.J);
    const double s = std::sin(k);
    return 2.0 * model.beta * j4 / (m.eps * m.eps) * c * c * sech2_cosh(x, 0.0)
         + 2.0 * j4 / (m.eps * m.eps * m.eps) * s * s * std::tanh(x);
}

double ising_metric(const IsingModel& model, double h)
{
    if (model.infinite()) return k_integral([&](double k) { return kernel_C(model, k, h); }) / (2.0 * kPi);
    std::vector<double> terms;
    for (double k : momentum_grid(model)) terms.push_back(kernel_C(model, k, h));
    return numerics::pairwise_sum(terms) / static_cast<double>(model.L);
}

MetricField ising_metric_field(const IsingModel& model)
{
    model.validate();
    return {MetricKind::Kubo, 1, 1.0, [model](const RealVector& v) {
                RealMatrix g(1, 1);
                g(0, 0) = ising_metric(model, v(0));
                return g;
            }};
}

double ising_fluctuation_metric(const IsingModel& model, double h)
{
    auto variance = [&](double k) { return model.beta * kernel_Cy(model, k, 0.0, h); };
    if (model.infinite()) return k_integral(variance) / (2.0 * kPi);
    std::vector<double> terms;
    for (double k : momentum_grid(model)) terms.push_back(variance(k));
    return numerics::pairwise_sum(terms) / static_cast<double>(model.L);
}

MetricField ising_fluctuation_metric_field(const IsingModel& model)
{
    model.validate();
    return {MetricKind::Fluctuation, 1, 0.0, [model](const RealVector& v) {
                RealMatrix m(1, 1);
                m(0, 0) = ising_fluctuation_metric(model, v(0));
                return m;
            }};
}

Path ising_linear_path(const IsingModel& model, std::size_t resolution)
{
    RealVector a(1);
    RealVector b(1);
    a << model.h0;
    b << model.h1;
    return Path::linear(a, b, resolution);
}

double ising_cgf(const IsingModel& model, const std::vector<double>& h, const std::vector<double>& phi,
                 double lambda)
{
    require_finite(model, "ising_cgf");
    model.validate();
    if (h.size() < 2) throw DomainError("ising_cgf: N must be at least 1");
    if (phi.size() != h.size() - 1) throw ValidationError("ising_cgf: need one Phi per step");
    if (!(lambda >= kCgfLambdaMin && lambda <= kCgfLambdaMax)) {
        throw DomainError("ising_cgf: lambda outside the supported range");
    }
    const auto ks = momentum_grid(model);
    const double L = static_cast<double>(model.L);
    std::vector<double> terms(phi.size());
    for (std::size_t n = 0; n + 1 < h.size(); ++n) {
        const double dh = h[n + 1] - h[n];
        auto f = [&](double y) {
            double total = 0.0;
            for (double k : ks) total += cy_unchecked(model, k, y, h[n]);
            return total;
        };
        terms[n] = -0.5 * model.beta * model.beta / L * (dh * dh + phi[n]) * cgf_double_integral(f, lambda, 1.0 / L);
    }
    return numerics::pairwise_sum(terms);
}

Prediction ising_wdiss(const MetricProfile& profile, std::size_t steps, const NoiseSet& noise)
{
    return lr_wdiss_continuous(profile, steps, noise);
}

HermitianOperator ising_mode_hamiltonian(const IsingModel& model, double k, double h)
{
    const ModeData m = mode_data(model, k, h);
    Matrix hk = Matrix::Zero(4, 4);
    hk(0, 0) = m.E;
    hk(1, 1) = -m.E;
    hk(0, 1) = Complex(0.0, -m.Omega);
    hk(1, 0) = Complex(0.0, m.Omega);
    return HermitianOperator(hk);
}

GibbsState ising_mode_gibbs(const IsingModel& model, double k, double h)
{
    return gibbs_state(ising_mode_hamiltonian(model, k, h), model.beta);
}

double ising_mode_exact_wdiss(const IsingModel& model, const std::vector<double>& h)
{
    require_finite(model, "ising_mode_exact_wdiss");
    if (!(model.beta > 0.0)) throw DomainError("ising_mode_exact_wdiss: beta must be positive");
    std::vector<double> terms;
    for (double k : momentum_grid(model)) {
        const auto states = mode_chain(model, k, h);
        terms.push_back(exact_wdiss(std::span<const GibbsState>(states)));
    }
    return numerics::pairwise_sum(terms);
}

double ising_mode_cgf(const IsingModel& model, const std::vector<double>& h, double lambda)
{
    require_finite(model, "ising_mode_cgf");
    std::vector<double> terms;
    for (double k : momentum_grid(model)) {
        const auto states = mode_chain(model, k, h);
        terms.push_back(cgf_exact(std::span<const GibbsState>(states), lambda));
    }
    return numerics::pairwise_sum(terms);
}

Matrix ising_spin_hamiltonian(const IsingModel& model, double h)
{
    require_finite(model, "ising_spin_hamiltonian");
    model.validate();
    if (model.L > kBruteForceMaxL) {
        throw ResourceError("ising_spin_hamiltonian: L = " + std::to_string(model.L) + " exceeds "
                            + std::to_string(kBruteForceMaxL));
    }
    if (model.L < 2) throw DomainError("ising_spin_hamiltonian: L must be at least 2");
    const auto L = static_cast<unsigned>(model.L);
    const Index dim = Index{1} << L;
    Matrix H = Matrix::Zero(dim, dim);
    // bit j set means sigma^z_j = -1
    for (Index s = 0; s < dim; ++s) {
        const auto state = static_cast<unsigned>(s);
        const int down = std::popcount(state);
        H(s, s) += -model.J * h * static_cast<double>(static_cast<int>(L) - 2 * down);
        for (unsigned j = 0; j + 1 < L; ++j) {
            const unsigned flipped = state ^ (1u << j) ^ (1u << (j + 1));
            H(static_cast<Index>(flipped), s) += -model.J;
        }
        // closing bond times the parity prod_j sigma^z_j
        const double parity = down % 2 == 0 ? 1.0 : -1.0;
        const unsigned flipped = state ^ (1u << (L - 1)) ^ 1u;
        H(static_cast<Index>(flipped), s) += -model.J * parity;
    }
    return H;
}

double ising_bruteforce_wdiss(const IsingModel& model, const std::vector<double>& h)
{
    StepSequence seq;
    seq.beta = model.beta;
    for (double hn : h) seq.hamiltonians.emplace_back(ising_spin_hamiltonian(model, hn));
    return exact_wdiss(seq);
}

} // namespace stepeq
