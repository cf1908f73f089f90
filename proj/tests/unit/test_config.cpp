#include <doctest.h>
#include <json.hpp>

#include "stepeq/commands.hpp"
#include "stepeq/config.hpp"
#include "stepeq/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stepeq;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const fs::path kConfigs = STEPEQ_CONFIG_DIR;

ConfigError parse_error(const std::string& text)
{
    try {
        parse_config(text, "test.ini");
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError for:\n" << text);
    return ConfigError("", 0, "", "");
}

const OutputFile& file(const CommandResult& r, const std::string& name)
{
    for (const auto& f : r.files) {
        if (f.name == name) return f;
    }
    FAIL("missing output " << name);
    return r.files.front();
}

std::vector<std::vector<double>> csv_rows(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(row);
    }
    return rows;
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("stepeq_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("config errors name the line and field")
{
    auto e = parse_error("[model]\ntype = qubit\nbeta = 1\nbogus = 3\n");
    CHECK(e.line == 4);
    CHECK(e.field == "model.bogus");
    CHECK(std::string(e.what()).find("test.ini:4") != std::string::npos);

    e = parse_error("[model]\ntype = qubit\nbeta = abc\n");
    CHECK(e.line == 3);
    CHECK(e.field == "model.beta");

    e = parse_error("[model]\ntype = qubit\n[model]\n");
    CHECK(e.line == 3);

    e = parse_error("[model]\ntype = qubit\nbeta = 1\nbeta = 2\n");
    CHECK(e.line == 4);
    CHECK(e.field == "model.beta");

    e = parse_error("[model]\ntype = ising\nL = 5\n");
    CHECK(e.field == "model.L");

    e = parse_error("[model]\ntype = qubit\n[protocol]\nn_grid = 4, 16, 8\n");
    CHECK(e.field == "protocol.n_grid");
    CHECK(e.line == 4);

    e = parse_error("[model]\ntype = qubit\n[protocol]\nn_grid = 4, 16\nN = 8\n");
    CHECK(e.field.rfind("protocol.", 0) == 0);

    e = parse_error("[model]\ntype = ising\n[sweep]\nparameter = alpha\nvalues = 0.1, 0.2\n");
    CHECK(e.field == "sweep.parameter");

    e = parse_error("[model]\ntype = qubit\n[protocol]\nkappa = 1.5\n");
    CHECK(e.field == "protocol.kappa");

    e = parse_error("[model]\ntype = qubit\nthis line has no equals sign\n");
    CHECK(e.line == 3);

    e = parse_error("[nonsense]\n");
    CHECK(e.line == 1);

    e = parse_error("[model]\ntype = qubit\n[run]\nformat = xml\n");
    CHECK(e.field == "run.format");

    e = parse_error("[model]\ntype = qubit\n[noise]\nkind = gwn\nsigma_eta = -1\n");
    CHECK(e.field.rfind("noise.", 0) == 0);
}

TEST_CASE("configs round-trip through their resolved text")
{
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".ini") continue;
        ++seen;
        CAPTURE(entry.path().string());
        const RunConfig c = load_config(entry.path().string());
        const std::string text = to_text(c);
        const RunConfig again = parse_config(text);
        CHECK(to_text(again) == text);
        CHECK(config_hash(again) == config_hash(c));
        CHECK(config_hash(c).size() == 16);
    }
    CHECK(seen >= 5);

    // comments, blank lines and spacing do not change the hash
    const RunConfig a = parse_config("[model]\ntype=flat\ng=2\n[noise]\nkind=gwn\nsigma_eta=0.1\n");
    const RunConfig b = parse_config("# toy\n[model]\n  type = flat ; inline\n\ng = 2.0\n[noise]\nkind = gwn\nsigma_eta = 1e-1\n");
    CHECK(config_hash(a) == config_hash(b));
    const RunConfig d = parse_config("[model]\ntype=flat\ng=3\n[noise]\nkind=gwn\nsigma_eta=0.1\n");
    CHECK(config_hash(a) != config_hash(d));

    const RunConfig grid = parse_config("[model]\ntype = qubit\n");
    CHECK(grid.protocol.n_grid.front() == 4);
    CHECK(grid.protocol.n_grid.back() == 4096);
    CHECK(grid.protocol.n_grid.size() == 16);
}

TEST_CASE("target Phi fixes the noise amplitude")
{
    for (const char* kind : {"gwn", "wiener", "ar1"}) {
        const RunConfig c = parse_config(std::string("[model]\ntype = flat\n[noise]\nkind = ") + kind
                                         + "\nphi = 0.5\nPhi = 0.004\n");
        CAPTURE(kind);
        CHECK(increment_variance(resolved_noise(c), 0) == doctest::Approx(0.004).epsilon(1e-12));
    }
}

TEST_CASE("predict")
{
    SUBCASE("zero noise is unbounded")
    {
        const RunConfig c = parse_config("[model]\ntype = flat\ng = 2\n[noise]\nkind = none\n[protocol]\nn_grid = 10, 20\n");
        const CommandResult r = cmd_predict(c);
        const json summary = json::parse(file(r, "summary.json").content);
        CHECK(summary["optimum"]["n_opt"] == "unbounded (quasi-static)");
    }
    SUBCASE("constant metric closed form")
    {
        const RunConfig c = load_config((kConfigs / "flat.ini").string());
        const CommandResult r = cmd_predict(c);
        const json summary = json::parse(file(r, "summary.json").content);
        // L = sqrt(g), n_opt = L / sqrt(g Phi)
        CHECK(summary["length"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
        CHECK(summary["optimum"]["n_opt"].get<double>() == doctest::Approx(100.0).epsilon(1e-9));
        const auto& pred = file(r, "pred.csv").content;
        CHECK(pred.rfind("# config_hash=" + config_hash(c) + " manifest=manifest.json\n", 0) == 0);
        CHECK(pred.find("N,wdiss_det,wdiss_stoch,wdiss_total,variance") != std::string::npos);
        CHECK(csv_rows(pred).size() == 3);
        const json manifest = json::parse(file(r, "manifest.json").content);
        CHECK(manifest["config_hash"] == config_hash(c));
        CHECK(to_text(parse_config(manifest["resolved_config"].get<std::string>())) == to_text(c));
    }
    SUBCASE("qubit parameters")
    {
        RunConfig c = load_config((kConfigs / "qubit_gwn.ini").string());
        c.protocol.resolution = 1024;
        const json summary = json::parse(file(cmd_predict(c), "summary.json").content);
        CHECK(summary["optimum"]["n_opt"].get<double>() == doctest::Approx(106.68).epsilon(1e-3));
    }
    SUBCASE("Phi sweep scales as a square root")
    {
        const RunConfig c = parse_config("[model]\ntype = flat\ng = 2\n[noise]\nkind = gwn\n[protocol]\nN = 10\n"
                                         "[sweep]\nparameter = Phi\nvalues = 1e-4, 1e-3, 1e-2\n");
        const auto rows = csv_rows(file(cmd_predict(c), "sweep.csv").content);
        REQUIRE(rows.size() == 3);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double slope = std::log(rows[i][5] / rows[i - 1][5]) / std::log(rows[i][0] / rows[i - 1][0]);
            CHECK(slope == doctest::Approx(0.5).epsilon(1e-9));
            CHECK(rows[i][3] < rows[i - 1][3]);
        }
    }
    SUBCASE("json format")
    {
        RunConfig c = load_config((kConfigs / "flat.ini").string());
        c.run.format = "json";
        const CommandResult r = cmd_predict(c);
        const json pred = json::parse(file(r, "pred.json").content);
        CHECK(pred.size() == 3);
    }
}

TEST_CASE("simulate")
{
    RunConfig c = load_config((kConfigs / "tfim_finite.ini").string());
    c.run.trajectories = 4;
    const CommandResult first = cmd_simulate(c);
    const CommandResult second = cmd_simulate(c);
    CHECK(file(first, "ensemble.csv").content == file(second, "ensemble.csv").content);
    const auto rows = csv_rows(file(first, "ensemble.csv").content);
    CHECK(rows.size() == c.protocol.n_grid.size());

    c.run.trajectories = 1;
    c.run.threads = 3;
    const auto single = csv_rows(file(cmd_simulate(c), "ensemble.csv").content);
    CHECK(single.size() == c.protocol.n_grid.size());
    for (const auto& row : single) CHECK(row[1] == 1.0);

    c.run.seed.reset();
    try {
        cmd_simulate(c);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "run.seed");
    }

    RunConfig infinite = load_config((kConfigs / "tfim_phi_sweep.ini").string());
    infinite.run.seed = 1;
    CHECK_THROWS(cmd_simulate(infinite));
}

TEST_CASE("geodesic command")
{
    const RunConfig flat = parse_config("[model]\ntype = flat\ng = 3\nv0 = -1\nv1 = 2\n");
    for (const auto& row : csv_rows(file(cmd_geodesic(flat), "geodesic.csv").content)) {
        CHECK(row[1] == doctest::Approx(-1.0 + 3.0 * row[0]).epsilon(1e-9));
        CHECK(row[2] == doctest::Approx(3.0 * std::sqrt(3.0)).epsilon(1e-9));
    }

    RunConfig q = load_config((kConfigs / "qubit_gwn.ini").string());
    q.protocol.kappa = {1.0};
    q.protocol.resolution = 512;
    const auto rows = csv_rows(file(cmd_geodesic(q), "geodesic.csv").content);
    REQUIRE(rows.size() == 201);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::abs(rows[i][1] + rows[200 - i][1]) < 1e-6);

    RunConfig tfim = parse_config("[model]\ntype = ising\nbeta = 5\nh0 = 0\nh1 = 5\n[protocol]\nresolution = 256\n");
    const json manifest = json::parse(file(cmd_geodesic(tfim), "manifest.json").content);
    CHECK(std::abs(manifest["slowest_v"].get<double>() - 1.0) < 0.1);

    CHECK_THROWS_AS(parse_config("[model]\ntype = flat\ng = 0\n"), ConfigError);
}

TEST_CASE("ising subcommands")
{
    const RunConfig c = load_config((kConfigs / "tfim_magnetisation.ini").string());
    const json check = json::parse(file(cmd_ising(c, "oracle-check"), "manifest.json").content);
    CHECK(check["max_deviation"].get<double>() < 1e-9);

    RunConfig mag = parse_config("[model]\ntype = ising\nbetas = 0.01, 1, 100\nfield_points = 11\n");
    const auto rows = csv_rows(file(cmd_ising(mag, "magnetisation"), "magnetisation.csv").content);
    REQUIRE(!rows.empty());
    CHECK_THROWS_AS(cmd_ising(mag, "spin-wave"), ConfigError);
}

TEST_CASE("noise check agrees with the closed forms")
{
    const RunConfig c = parse_config("[model]\ntype = flat\n[noise]\nkind = ar1\nsigma_eta = 0.1\nphi = 0.6\n"
                                     "[run]\ntrajectories = 20000\nseed = 5\n");
    const CommandResult r = cmd_noise_check(c);
    CHECK(!r.files.empty());
}

TEST_CASE("outputs are staged and renamed")
{
    const fs::path dir = scratch_dir("write");
    write_outputs(dir, {{"a.csv", "x\n1\n"}, {"b.json", "{}\n"}});
    CHECK(fs::exists(dir / "a.csv"));
    CHECK(fs::exists(dir / "b.json"));
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        ++count;
        CHECK(e.path().extension() != ".tmp");
    }
    CHECK(count == 2);

    // second file cannot be placed: nothing from this call survives
    const fs::path bad = scratch_dir("write_fail");
    fs::create_directories(bad / "blocked.csv");
    fs::create_directories(bad / "blocked.csv" / "child");
    CHECK_THROWS(write_outputs(bad, {{"fresh.csv", "1\n"}, {"blocked.csv", "2\n"}}));
    CHECK(!fs::exists(bad / "fresh.csv"));
    CHECK(!fs::exists(bad / "fresh.csv.tmp"));
    CHECK(!fs::exists(bad / "blocked.csv.tmp"));
    fs::remove_all(dir);
    fs::remove_all(bad);
}
