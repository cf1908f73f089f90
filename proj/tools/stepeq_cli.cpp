// stepeq: command-line front end
//
//   stepeq predict     --config run.ini [--out DIR] [--format csv|json]
//   stepeq simulate    --config run.ini [--seed U64] [--threads N]
//   stepeq geodesic    --config run.ini
//   stepeq ising       magnetisation|wdiss|oracle-check --config run.ini
//   stepeq noise-check --config run.ini
//
// Exit status: 0 success, 2 configuration or validation error, 1 numerical failure.

#include "stepeq/commands.hpp"
#include "stepeq/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string format;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "run configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory (overrides run.output)");
    cmd->add_option("--seed", o.seed, "master seed (overrides run.seed)");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

stepeq::RunConfig resolve(const Overrides& o)
{
    stepeq::RunConfig c = stepeq::load_config(o.config);
    if (!o.out.empty()) c.run.output = o.out;
    if (o.seed) c.run.seed = *o.seed;
    if (o.threads) c.run.threads = *o.threads;
    if (!o.format.empty()) c.run.format = o.format;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"stepeq: dissipation of noisy step-equilibration protocols"};
    app.require_subcommand(1);
    Overrides o;
    std::string ising_sub;

    auto* predict = app.add_subcommand("predict", "linear-response predictions and optimal step counts");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensembles over the N grid");
    auto* geo = app.add_subcommand("geodesic", "optimal path for a one-dimensional control");
    auto* ising = app.add_subcommand("ising", "transverse-field Ising chain tables");
    auto* noise = app.add_subcommand("noise-check", "empirical versus analytic increment variances");
    for (auto* cmd : {predict, simulate, geo, ising, noise}) add_common(cmd, o);
    ising->add_option("task", ising_sub, "magnetisation | wdiss | oracle-check")
        ->required()
        ->check(CLI::IsMember({"magnetisation", "wdiss", "oracle-check"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const stepeq::RunConfig config = resolve(o);
        stepeq::CommandResult result;
        if (predict->parsed()) result = stepeq::cmd_predict(config);
        else if (simulate->parsed()) result = stepeq::cmd_simulate(config);
        else if (geo->parsed()) result = stepeq::cmd_geodesic(config);
        else if (ising->parsed()) result = stepeq::cmd_ising(config, ising_sub);
        else result = stepeq::cmd_noise_check(config);
        stepeq::write_outputs(config.run.output, result.files);
        std::cout << result.report << "\n";
        for (const auto& f : result.files) std::cout << "wrote " << config.run.output << "/" << f.name << "\n";
        return 0;
    } catch (const stepeq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    }
}
