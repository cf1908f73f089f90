// config.hpp: sectioned key = value run configuration
//
//   [model]     type = qubit | ising | flat, plus the model parameters
//   [noise]     kind, sigma_eta, phi, ar_amplitude, ar_decay, ar_coeffs, Phi
//   [protocol]  path, N | n_grid | n_min/n_max/n_count, kappa, resolution
//   [sweep]     parameter = N | Phi | beta | h1 | alpha, values
//   [run]       trajectories, seed, output, threads, format
//
// '#' and ';' start comments. Lists are comma separated.

#pragma once

#include "stepeq/noise.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepeq {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);
    std::string source;
    int line{0};       // 0 when the problem is not tied to a line
    std::string field;
};

enum class ModelType { Qubit, Ising, Flat };

struct ModelSection {
    ModelType type{ModelType::Qubit};
    double beta{1.0};
    // qubit
    double delta{1.0};
    double omega0{-5.0};
    double omega1{5.0};
    double alpha{0.5};
    double omega_c{1.0};
    // ising
    double J{1.0};
    std::size_t L{0};                 // 0 = infinite
    double h0{0.0};
    double h1{5.0};
    std::vector<double> betas;        // magnetisation / temperature tables
    std::size_t field_points{101};
    // flat toy model: constant metric g over v0 -> v1
    double g{1.0};
    double v0{0.0};
    double v1{1.0};
};

struct NoiseSection {
    NoiseModel model;
    std::optional<double> target_phi;   // sets sigma_eta so that Phi equals this value
};

enum class PathKind { Linear, Geodesic };

struct ProtocolSection {
    PathKind path{PathKind::Geodesic};
    std::vector<std::size_t> n_grid;    // resolved, strictly increasing
    std::vector<double> kappa{1.0};
    std::size_t resolution{2048};
};

enum class SweepParameter { None, N, Phi, Beta, H1, Alpha };

struct SweepSection {
    SweepParameter parameter{SweepParameter::None};
    std::vector<double> values;
};

struct RunSection {
    std::size_t trajectories{100};
    std::optional<std::uint64_t> seed;
    std::string output{"out"};
    unsigned threads{1};
    std::string format{"csv"};
};

struct RunConfig {
    std::string source{"<memory>"};
    ModelSection model;
    NoiseSection noise;
    ProtocolSection protocol;
    SweepSection sweep;
    RunSection run;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<memory>");
RunConfig load_config(const std::string& path);

// Fully resolved config text; parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& config);

// FNV-1a of the resolved text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Noise model after applying target_phi.
NoiseModel resolved_noise(const RunConfig& config);

std::string to_string(ModelType type);
std::string to_string(PathKind kind);
std::string to_string(SweepParameter parameter);

} // namespace stepeq
