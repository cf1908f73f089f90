// noise.hpp: discrete classical control-noise processes
//
// All processes are driven by i.i.d. Gaussian increments with standard deviation
// sigma_eta:
//   GWN     xi_{n+1} = eta_n,                      xi_0 ~ N(0, sigma^2)
//   Wiener  xi_{n+1} = xi_n + eta_n,               xi_0 = 0
//   AR1     xi_{n+1} = phi xi_n + eta_n,           xi_0 ~ stationary law (phi < 1)
//   ARn     xi_{n+1} = sum_{i=1}^{n} phi_i xi_{n+1-i} + eta_n,   xi_0 = 0
// The initial laws make the closed-form increment variances exact at every n.

#pragma once

#include "stepeq/operator_core.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stepeq {

enum class NoiseKind { None, GWN, Wiener, AR1, ARn };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

// Memory coefficients phi_i (i >= 1) of the ARn process. When `explicit_coeffs`
// is non-empty it lists phi_1, phi_2, ... and later coefficients are zero;
// otherwise phi_i = amplitude * exp(-decay * (i - 1)), i.e. the most recent
// sample carries lag 0.
struct ArCoefficientRule {
    double amplitude{0.642};
    double decay{1.0};
    std::vector<double> explicit_coeffs;

    double coefficient(std::size_t i) const;
};

struct NoiseModel {
    NoiseKind kind{NoiseKind::None};
    double sigma_eta{0.0};
    double phi{0.5};          // AR1 only
    ArCoefficientRule ar;     // ARn only

    void validate() const;
    bool silent() const { return kind == NoiseKind::None || sigma_eta == 0.0; }

    static NoiseModel none() { return {}; }
    static NoiseModel gwn(double sigma) { return {NoiseKind::GWN, sigma, 0.5, {}}; }
    static NoiseModel wiener(double sigma) { return {NoiseKind::Wiener, sigma, 0.5, {}}; }
    static NoiseModel ar1(double sigma, double phi) { return {NoiseKind::AR1, sigma, phi, {}}; }
    static NoiseModel arn(double sigma, ArCoefficientRule rule) { return {NoiseKind::ARn, sigma, 0.5, std::move(rule)}; }
};

// One independent model per control index.
using NoiseSet = std::vector<NoiseModel>;

struct NoiseTrajectory {
    std::vector<std::vector<double>> values;  // [control][n], n = 0..N
    std::uint64_t seed{0};
    std::uint64_t trajectory_index{0};

    std::size_t steps() const { return values.empty() ? 0 : values.front().size() - 1; }
};

// Seed of the random substream for (master seed, trajectory, control).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t control);

std::vector<double> sample_noise_path(const NoiseModel& model, std::size_t steps,
                                      std::uint64_t seed, std::uint64_t index,
                                      std::uint64_t control = 0);

NoiseTrajectory sample_trajectory(const NoiseSet& models, std::size_t steps,
                                  std::uint64_t seed, std::uint64_t index);
NoiseTrajectory sample_trajectory(const NoiseModel& model, std::size_t steps,
                                  std::uint64_t seed, std::uint64_t index);

// h_0 .. h_{n_max}; h_{-1} = 0, h_0 = 1, h_n = sum_{i=1}^n phi_i h_{n-i}.
std::vector<double> ar_influence_coeffs(const NoiseModel& model, std::size_t n_max);

// Phi_n = Var(xi_{n+1} - xi_n).
double increment_variance(const NoiseModel& model, std::size_t n);

// Phi_0 .. Phi_{steps-1}; ARn evaluated in O(steps) total.
std::vector<double> increment_variances(const NoiseModel& model, std::size_t steps);

// Diagonal d x d tensor for step n (controls are independent).
RealMatrix increment_variance_tensor(const NoiseSet& models, std::size_t n);

// Sample variance of xi_{n+1} - xi_n over `trials` independent trajectories.
double empirical_increment_variance(const NoiseModel& model, std::size_t steps, std::size_t n,
                                    std::size_t trials, std::uint64_t seed);

} // namespace stepeq
