// commands.hpp: batch commands behind the stepeq CLI
//
// Each command turns a resolved RunConfig into a set of named output files.
// Nothing is written until the command has finished; write_outputs then
// places every file through a temporary name and a rename.

#pragma once

#include "stepeq/config.hpp"
#include "stepeq/geometry.hpp"
#include "stepeq/montecarlo.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace stepeq {

struct OutputFile {
    std::string name;
    std::string content;
};
using OutputFiles = std::vector<OutputFile>;

struct CommandResult {
    OutputFiles files;
    std::string report;   // short human-readable summary for stdout
};

// Metrics, reference path, noise and (when available) a chain evaluator for
// the configured model.
struct Problem {
    ModelType type{ModelType::Qubit};
    double beta{1.0};
    MetricField g;
    MetricField m;
    Path path;                            // straight line between the endpoints
    NoiseSet noise;
    std::shared_ptr<const ChainModel> chain;   // null for the infinite chain
};

Problem build_problem(const RunConfig& config);

using Cell = std::variant<double, std::string>;

// Row-oriented table; numeric CSV cells carry 17 significant digits.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::string to_csv(const std::string& preamble = {}) const;
    std::string to_json() const;
};

CommandResult cmd_predict(const RunConfig& config);
// Requires run.seed.
CommandResult cmd_simulate(const RunConfig& config);
CommandResult cmd_geodesic(const RunConfig& config);
// subcommand: magnetisation | wdiss | oracle-check
CommandResult cmd_ising(const RunConfig& config, const std::string& subcommand);
CommandResult cmd_noise_check(const RunConfig& config);

void write_outputs(const std::filesystem::path& dir, const OutputFiles& files);

} // namespace stepeq
