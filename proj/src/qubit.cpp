// qubit.cpp: polaron renormalisation and Landau-Zener schedules

#include "stepeq/qubit.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

namespace stepeq {

void QubitModel::validate() const
{
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("qubit: delta must be non-negative");
    if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw DomainError("qubit: omega_c must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("qubit: alpha must be non-negative");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("qubit: beta must be positive and finite");
    if (!std::isfinite(omega0) || !std::isfinite(omega1)) throw DomainError("qubit: ramp endpoints must be finite");
}

namespace {

double gamma_exponent(double alpha, double beta, double omega_c)
{
    // J(w) coth(beta w/2) / w^2 = (alpha / wc^2) w e^{-w/wc} coth(beta w/2)
    auto integrand = [beta, omega_c](double w) {
        const double x = 0.5 * beta * w;
        const double w_coth = x < 1e-8 ? 2.0 / beta : w / std::tanh(x);
        return w_coth * std::exp(-w / omega_c);
    };
    const double integral = numerics::integrate_adaptive(integrand, 0.0, 50.0 * omega_c, 1e-12, 1e-300,
                                                         "gamma_renorm");
    return -2.0 * alpha / (omega_c * omega_c) * integral;
}

} // namespace

double gamma_renorm(double alpha, double beta, double omega_c)
{
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("gamma_renorm: beta must be positive");
    if (!(omega_c > 0.0)) throw DomainError("gamma_renorm: omega_c must be positive");
    if (!(alpha >= 0.0)) throw DomainError("gamma_renorm: alpha must be non-negative");
    if (alpha == 0.0) return 1.0;

    static std::shared_mutex mutex;
    static std::map<std::tuple<double, double, double>, double> cache;
    const auto key = std::make_tuple(alpha, beta, omega_c);
    {
        std::shared_lock lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const double value = std::exp(gamma_exponent(alpha, beta, omega_c));
    std::unique_lock lock(mutex);
    cache.emplace(key, value);
    return value;
}

double gamma_renorm(const QubitModel& model)
{
    return gamma_renorm(model.alpha, model.beta, model.omega_c);
}

HermitianOperator polaron_hamiltonian(const QubitModel& model, double omega)
{
    model.validate();
    const double tunnelling = model.delta * gamma_renorm(model);
    return HermitianOperator(0.5 * (omega * pauli::z() + tunnelling * pauli::x()));
}

ControlSchedule landau_zener_schedule(const QubitModel& model, std::size_t resolution)
{
    model.validate();
    if (model.omega0 == model.omega1) throw DomainError("landau_zener_schedule: omega0 must differ from omega1");
    const double tunnelling = model.delta * gamma_renorm(model);
    RealVector start(1);
    RealVector end(1);
    start << model.omega0;
    end << model.omega1;
    ControlSchedule s{{HermitianOperator(0.5 * pauli::z())},
                      HermitianOperator(0.5 * tunnelling * pauli::x()),
                      Path::linear(start, end, resolution),
                      model.beta};
    s.validate();
    return s;
}

} // namespace stepeq
