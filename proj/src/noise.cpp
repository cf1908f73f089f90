// noise.cpp: samplers and increment variances for the control-noise processes

#include "stepeq/noise.hpp"
#include "stepeq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stepeq {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::string to_string(NoiseKind kind)
{
    switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::GWN: return "gwn";
    case NoiseKind::Wiener: return "wiener";
    case NoiseKind::AR1: return "ar1";
    case NoiseKind::ARn: return "arn";
    }
    return "none";
}

NoiseKind noise_kind_from_string(const std::string& name)
{
    if (name == "none") return NoiseKind::None;
    if (name == "gwn") return NoiseKind::GWN;
    if (name == "wiener") return NoiseKind::Wiener;
    if (name == "ar1") return NoiseKind::AR1;
    if (name == "arn") return NoiseKind::ARn;
    throw ValidationError("unknown noise kind '" + name + "' (expected none|gwn|wiener|ar1|arn)");
}

double ArCoefficientRule::coefficient(std::size_t i) const
{
    if (i == 0) return 0.0;
    if (!explicit_coeffs.empty()) {
        return i <= explicit_coeffs.size() ? explicit_coeffs[i - 1] : 0.0;
    }
    return amplitude * std::exp(-decay * static_cast<double>(i - 1));
}

void NoiseModel::validate() const
{
    if (!std::isfinite(sigma_eta) || sigma_eta < 0.0) {
        throw DomainError("noise: sigma_eta must be finite and non-negative");
    }
    if (kind == NoiseKind::AR1) {
        if (!std::isfinite(phi)) throw DomainError("noise: phi must be finite");
        if (phi > 1.0) throw InstabilityError("noise: AR(1) response phi > 1 is explosive");
        if (phi < 0.0) throw DomainError("noise: AR(1) response phi must lie in [0, 1]");
    }
    if (kind == NoiseKind::ARn) {
        if (!std::isfinite(ar.amplitude) || !std::isfinite(ar.decay)) {
            throw DomainError("noise: AR(n) amplitude and decay must be finite");
        }
        for (double c : ar.explicit_coeffs) {
            if (!std::isfinite(c)) throw DomainError("noise: AR(n) coefficients must be finite");
        }
    }
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t control)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ trajectory);
    h = splitmix64(h ^ (control + 0x632be59bd9b4e019ULL));
    return h;
}

std::vector<double> sample_noise_path(const NoiseModel& model, std::size_t steps,
                                      std::uint64_t seed, std::uint64_t index, std::uint64_t control)
{
    if (steps == 0) throw DomainError("sample_trajectory: N must be at least 1");
    model.validate();
    std::vector<double> xi(steps + 1, 0.0);
    if (model.silent()) return xi;

    std::mt19937_64 engine(substream_seed(seed, index, control));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = model.sigma_eta;

    switch (model.kind) {
    case NoiseKind::None:
        break;
    case NoiseKind::GWN:
        xi[0] = sigma * normal(engine);
        for (std::size_t n = 0; n < steps; ++n) xi[n + 1] = sigma * normal(engine);
        break;
    case NoiseKind::Wiener:
        for (std::size_t n = 0; n < steps; ++n) xi[n + 1] = xi[n] + sigma * normal(engine);
        break;
    case NoiseKind::AR1:
        if (model.phi < 1.0) {
            xi[0] = sigma / std::sqrt(1.0 - model.phi * model.phi) * normal(engine);
        }
        for (std::size_t n = 0; n < steps; ++n) xi[n + 1] = model.phi * xi[n] + sigma * normal(engine);
        break;
    case NoiseKind::ARn: {
        std::vector<double> coeffs(steps + 1);
        for (std::size_t i = 0; i <= steps; ++i) coeffs[i] = model.ar.coefficient(i);
        for (std::size_t n = 0; n < steps; ++n) {
            double memory = 0.0;
            for (std::size_t i = 1; i <= n; ++i) memory += coeffs[i] * xi[n + 1 - i];
            xi[n + 1] = memory + sigma * normal(engine);
        }
        break;
    }
    }
    return xi;
}

NoiseTrajectory sample_trajectory(const NoiseSet& models, std::size_t steps,
                                  std::uint64_t seed, std::uint64_t index)
{
    NoiseTrajectory out;
    out.seed = seed;
    out.trajectory_index = index;
    out.values.reserve(models.size());
    for (std::size_t j = 0; j < models.size(); ++j) {
        out.values.push_back(sample_noise_path(models[j], steps, seed, index, j));
    }
    return out;
}

NoiseTrajectory sample_trajectory(const NoiseModel& model, std::size_t steps,
                                  std::uint64_t seed, std::uint64_t index)
{
    return sample_trajectory(NoiseSet{model}, steps, seed, index);
}

std::vector<double> ar_influence_coeffs(const NoiseModel& model, std::size_t n_max)
{
    if (model.kind != NoiseKind::ARn) throw ValidationError("ar_influence_coeffs: model must be ARn");
    model.validate();
    std::vector<double> h(n_max + 1, 0.0);
    h[0] = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        double total = 0.0;
        for (std::size_t i = 1; i <= n; ++i) total += model.ar.coefficient(i) * h[n - i];
        h[n] = total;
    }
    return h;
}

std::vector<double> increment_variances(const NoiseModel& model, std::size_t steps)
{
    model.validate();
    std::vector<double> out(steps, 0.0);
    if (model.silent() || steps == 0) return out;
    const double s2 = model.sigma_eta * model.sigma_eta;
    switch (model.kind) {
    case NoiseKind::None:
        break;
    case NoiseKind::GWN:
        std::fill(out.begin(), out.end(), 2.0 * s2);
        break;
    case NoiseKind::Wiener:
        std::fill(out.begin(), out.end(), s2);
        break;
    case NoiseKind::AR1: {
        const double phi = model.phi;
        const double value = phi < 1.0 ? s2 * ((phi - 1.0) * (phi - 1.0) / (1.0 - phi * phi) + 1.0) : s2;
        std::fill(out.begin(), out.end(), value);
        break;
    }
    case NoiseKind::ARn: {
        const auto h = ar_influence_coeffs(model, steps);
        double running = 0.0;
        double previous = 0.0;
        for (std::size_t n = 0; n < steps; ++n) {
            const double diff = h[n] - previous;
            running += diff * diff;
            previous = h[n];
            out[n] = s2 * running;
        }
        break;
    }
    }
    return out;
}

double increment_variance(const NoiseModel& model, std::size_t n)
{
    return increment_variances(model, n + 1).back();
}

RealMatrix increment_variance_tensor(const NoiseSet& models, std::size_t n)
{
    const auto d = static_cast<Index>(models.size());
    RealMatrix phi = RealMatrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) phi(j, j) = increment_variance(models[static_cast<std::size_t>(j)], n);
    return phi;
}

double empirical_increment_variance(const NoiseModel& model, std::size_t steps, std::size_t n,
                                    std::size_t trials, std::uint64_t seed)
{
    if (trials < 1000) throw DomainError("empirical_increment_variance: need at least 1000 trials");
    if (n >= steps) throw DomainError("empirical_increment_variance: step index must be below N");
    // Welford accumulation in trial order
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto xi = sample_noise_path(model, steps, seed, t);
        const double inc = xi[n + 1] - xi[n];
        const double delta = inc - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (inc - mean);
    }
    return m2 / static_cast<double>(trials - 1);
}

} // namespace stepeq
