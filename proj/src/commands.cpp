// commands.cpp: predict / simulate / geodesic / ising / noise-check

#include "stepeq/commands.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/ising.hpp"
#include "stepeq/predictor.hpp"
#include "stepeq/qubit.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>

namespace stepeq {

namespace {

using json = nlohmann::ordered_json;

std::string format_cell(const Cell& cell)
{
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(cell));
    return buf;
}

json cell_json(const Cell& cell)
{
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    const double v = std::get<double>(cell);
    if (!std::isfinite(v)) return format_cell(cell);
    return v;
}

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

double as_double(std::size_t n) { return static_cast<double>(n); }

RealVector scalar(double v)
{
    RealVector out(1);
    out << v;
    return out;
}

IsingModel ising_model(const ModelSection& m)
{
    IsingModel out{m.J, m.L, m.h0, m.h1, m.beta};
    out.validate();
    return out;
}

QubitModel qubit_model(const ModelSection& m)
{
    QubitModel out{m.delta, m.omega0, m.omega1, m.alpha, m.omega_c, m.beta};
    out.validate();
    return out;
}

void require_model(const RunConfig& c, ModelType type, const std::string& command)
{
    if (c.model.type != type) {
        throw ConfigError(c.source, 0, "model.type", command + " needs type = " + to_string(type));
    }
}

// Applies one sweep value to a copy of the config.
RunConfig with_sweep_value(RunConfig c, double value)
{
    switch (c.sweep.parameter) {
    case SweepParameter::None:
    case SweepParameter::N: break;
    case SweepParameter::Phi: c.noise.target_phi = value; break;
    case SweepParameter::Beta: c.model.beta = value; break;
    case SweepParameter::H1: c.model.h1 = value; break;
    case SweepParameter::Alpha: c.model.alpha = value; break;
    }
    return c;
}

Path protocol_path(const RunConfig& c, const Problem& pb)
{
    if (c.protocol.path == PathKind::Linear) return pb.path;
    return geodesic(pb.path, pb.g, c.protocol.resolution);
}

class Writer {
public:
    explicit Writer(const RunConfig& c) : config_(c), hash_(config_hash(c)) {}

    void table(const std::string& stem, const Table& t)
    {
        if (config_.run.format == "json") {
            files_.push_back({stem + ".json", t.to_json()});
        } else {
            files_.push_back({stem + ".csv", t.to_csv("# config_hash=" + hash_ + " manifest=manifest.json")});
        }
    }

    void add(const std::string& name, const std::string& content) { files_.push_back({name, content}); }

    CommandResult finish(const std::string& command, json extra, std::string report)
    {
        json manifest;
        manifest["command"] = command;
        manifest["config_hash"] = hash_;
        manifest["config_source"] = config_.source;
        if (config_.run.seed) manifest["seed"] = *config_.run.seed;
        else manifest["seed"] = nullptr;
        manifest["threads"] = config_.run.threads;
        manifest["started"] = started_;
        manifest["finished"] = timestamp();
        json names = json::array();
        for (const auto& f : files_) names.push_back(f.name);
        manifest["outputs"] = names;
        for (auto& [key, value] : extra.items()) manifest[key] = value;
        manifest["resolved_config"] = to_text(config_);
        files_.push_back({"manifest.json", manifest.dump(2) + "\n"});
        return {std::move(files_), std::move(report)};
    }

private:
    const RunConfig& config_;
    std::string hash_;
    std::string started_{timestamp()};
    OutputFiles files_;
};

json optimum_json(const OptimalSteps& opt)
{
    json j;
    if (opt.unbounded) {
        j["n_opt"] = "unbounded (quasi-static)";
        j["n_opt_int"] = nullptr;
        j["w_opt"] = 0.0;
    } else {
        j["n_opt"] = opt.n_real;
        j["n_opt_int"] = opt.n_best;
        j["w_opt"] = opt.w_opt;
    }
    j["length"] = opt.length;
    j["noise_integral"] = opt.noise_integral;
    return j;
}

struct OptimumSummary {
    OptimalSteps opt;
    double variance{std::numeric_limits<double>::quiet_NaN()};
};

// Optimum on the geodesic of g; the geodesic and both profiles depend only on
// the model, so noise-only sweeps reuse them.
class OptimumEvaluator {
public:
    explicit OptimumEvaluator(const RunConfig& c)
        : problem_(build_problem(c)),
          geo_(geodesic(problem_.path, problem_.g, c.protocol.resolution)),
          g_profile_(geo_, problem_.g),
          m_profile_(geo_, problem_.m)
    {
    }

    OptimumSummary operator()(const NoiseSet& noise) const
    {
        OptimumSummary out;
        out.opt = optimal_steps(g_profile_, noise);
        if (!out.opt.unbounded) out.variance = lr_variance(m_profile_, out.opt.n_best, noise, problem_.beta);
        return out;
    }

    const NoiseSet& noise() const { return problem_.noise; }

private:
    Problem problem_;
    Path geo_;
    MetricProfile g_profile_;
    MetricProfile m_profile_;
};

OptimumSummary summarise_optimum(const RunConfig& c)
{
    const OptimumEvaluator evaluate(c);
    return evaluate(evaluate.noise());
}

} // namespace

std::string Table::to_csv(const std::string& preamble) const
{
    std::ostringstream out;
    if (!preamble.empty()) out << preamble << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << "\n";
    }
    return out.str();
}

std::string Table::to_json() const
{
    json rows_json = json::array();
    for (const auto& row : rows) {
        json obj;
        for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) obj[columns[i]] = cell_json(row[i]);
        rows_json.push_back(obj);
    }
    return rows_json.dump(2) + "\n";
}

Problem build_problem(const RunConfig& c)
{
    const NoiseModel noise = resolved_noise(c);
    const auto res = c.protocol.resolution;
    switch (c.model.type) {
    case ModelType::Qubit: {
        const QubitModel q = qubit_model(c.model);
        ControlSchedule schedule = landau_zener_schedule(q, res);
        Problem pb{ModelType::Qubit, q.beta, kubo_metric_field(schedule), fluctuation_metric_field(schedule),
                   schedule.path, {noise}, nullptr};
        pb.chain = std::make_shared<ScheduleChain>(std::move(schedule));
        return pb;
    }
    case ModelType::Ising: {
        const IsingModel im = ising_model(c.model);
        Problem pb{ModelType::Ising, im.beta, ising_metric_field(im), ising_fluctuation_metric_field(im),
                   ising_linear_path(im, res), {noise}, nullptr};
        if (!im.infinite()) pb.chain = std::make_shared<IsingModeChain>(im);
        return pb;
    }
    case ModelType::Flat: {
        RealMatrix g(1, 1);
        g(0, 0) = c.model.g;
        const MetricField field = constant_metric_field(g);
        return {ModelType::Flat, c.model.beta, field, field,
                Path::linear(scalar(c.model.v0), scalar(c.model.v1), res), {noise}, nullptr};
    }
    }
    throw ValidationError("build_problem: unknown model type");
}

CommandResult cmd_predict(const RunConfig& c)
{
    Writer writer(c);
    const Problem pb = build_problem(c);
    const Path path = protocol_path(c, pb);
    const MetricProfile pg(path, pb.g);
    const MetricProfile pm(path, pb.m);

    Table pred{{"N", "wdiss_det", "wdiss_stoch", "wdiss_total", "variance"}, {}};
    for (std::size_t n : c.protocol.n_grid) {
        const Prediction p = lr_wdiss_continuous(pg, n, pb.noise);
        const double var = lr_variance(pm, n, pb.noise, pb.beta);
        pred.rows.push_back({as_double(n), p.wdiss_det, p.wdiss_stoch, p.wdiss_total, var});
    }
    writer.table("pred", pred);

    const OptimumSummary best = summarise_optimum(c);
    json summary;
    summary["model"] = to_string(c.model.type);
    summary["path"] = to_string(c.protocol.path);
    summary["length"] = pg.length();
    summary["optimum"] = optimum_json(best.opt);
    summary["variance_at_n_opt"] = best.opt.unbounded ? json(nullptr) : json(best.variance);

    json kappas = json::array();
    for (double kappa : c.protocol.kappa) {
        const KappaCost probe = kappa_cost(pb.g, pb.m, pb.path, c.protocol.n_grid.back(), pb.noise, kappa,
                                           pb.beta, c.protocol.resolution);
        const std::size_t n = probe.optimum.unbounded ? c.protocol.n_grid.back() : probe.optimum.n_best;
        const KappaCost at = kappa_cost(pb.g, pb.m, pb.path, n, pb.noise, kappa, pb.beta, c.protocol.resolution);
        json k;
        k["kappa"] = kappa;
        k["optimum"] = optimum_json(at.optimum);
        k["N"] = n;
        k["cost"] = at.cost;
        k["wdiss"] = at.wdiss;
        k["variance"] = at.variance;
        kappas.push_back(k);
    }
    summary["kappa"] = kappas;

    if (c.sweep.parameter != SweepParameter::None && c.sweep.parameter != SweepParameter::N) {
        Table sweep{{to_string(c.sweep.parameter), "length", "noise_integral", "n_opt", "n_opt_int", "w_opt",
                     "variance_at_n_opt"},
                    {}};
        std::optional<OptimumEvaluator> shared;
        if (c.sweep.parameter == SweepParameter::Phi) shared.emplace(c);
        for (double value : c.sweep.values) {
            const RunConfig point = with_sweep_value(c, value);
            const OptimumSummary s = shared ? (*shared)(NoiseSet{resolved_noise(point)}) : summarise_optimum(point);
            sweep.rows.push_back({value, s.opt.length, s.opt.noise_integral, s.opt.n_real,
                                  s.opt.unbounded ? std::numeric_limits<double>::infinity() : as_double(s.opt.n_best),
                                  s.opt.w_opt, s.variance});
        }
        writer.table("sweep", sweep);
    }
    writer.add("summary.json", summary.dump(2) + "\n");

    std::ostringstream report;
    report << "length " << pg.length() << ", n_opt ";
    if (best.opt.unbounded) report << "unbounded (quasi-static)";
    else report << best.opt.n_real << " (integer " << best.opt.n_best << "), w_opt " << best.opt.w_opt;
    return writer.finish("predict", json::object(), report.str());
}

CommandResult cmd_simulate(const RunConfig& c)
{
    if (!c.run.seed) throw ConfigError(c.source, 0, "run.seed", "simulate needs a seed (config or --seed)");
    if (c.sweep.parameter != SweepParameter::None && c.sweep.parameter != SweepParameter::N) {
        throw ConfigError(c.source, 0, "sweep.parameter", "simulate only sweeps over N");
    }
    Writer writer(c);
    const Problem pb = build_problem(c);
    if (!pb.chain) {
        throw ConfigError(c.source, 0, "model", "simulate needs the qubit or a finite Ising chain");
    }
    const Path path = protocol_path(c, pb);
    const auto pg = std::make_shared<MetricProfile>(path, pb.g);
    const MetricProfile pm(path, pb.m);

    Discretizer discretize;
    if (c.protocol.path == PathKind::Geodesic) {
        discretize = [pg](std::size_t n) { return discretize_equal_length(*pg, n); };
    } else {
        discretize = [path](std::size_t n) { return discretize_uniform(path, n); };
    }
    const NoiseSet noise = pb.noise;
    const Predictor predict = [pg, noise](std::size_t n) { return lr_wdiss_continuous(*pg, n, noise); };

    EnsembleOptions options;
    options.trajectories = c.run.trajectories;
    options.seed = *c.run.seed;
    options.threads = c.run.threads;
    options.tpms = true;
    const SweepResult sweep = sweep_n(*pb.chain, discretize, pb.noise, c.protocol.n_grid, options, predict);

    Table table{{"N", "r", "mean_wdiss", "stderr", "tpms_variance", "lr_wdiss", "lr_variance", "pass"}, {}};
    std::size_t passed = 0;
    for (const auto& row : sweep.rows) {
        const double lr = row.prediction.wdiss_total;
        const double lr_var = lr_variance(pm, row.stats.N, pb.noise, pb.beta);
        const bool pass = std::abs(row.stats.mean_wdiss - lr) <= 3.0 * row.stats.std_error;
        passed += pass ? 1 : 0;
        table.rows.push_back({as_double(row.stats.N), as_double(row.stats.trajectories), row.stats.mean_wdiss,
                              row.stats.std_error, row.stats.mean_tpms_variance, lr, lr_var, pass ? 1.0 : 0.0});
    }
    writer.table("ensemble", table);

    const std::size_t argmin_n = sweep.rows[sweep.argmin].stats.N;
    const OptimumSummary best = summarise_optimum(c);
    json extra;
    extra["argmin_N"] = argmin_n;
    extra["predicted_optimum"] = optimum_json(best.opt);
    extra["rows_within_3_stderr"] = passed;
    extra["rows"] = sweep.rows.size();

    std::ostringstream report;
    report << passed << "/" << sweep.rows.size() << " rows within 3 stderr of linear response; empirical argmin N = "
           << argmin_n;
    return writer.finish("simulate", extra, report.str());
}

CommandResult cmd_geodesic(const RunConfig& c)
{
    Writer writer(c);
    const Problem pb = build_problem(c);
    const double kappa = c.protocol.kappa.front();
    const MetricField metric = mixture_metric_field(pb.g, pb.m, kappa);
    const Path geo = geodesic(pb.path, metric, c.protocol.resolution);
    const MetricProfile profile(geo, metric);

    constexpr std::size_t kRows = 201;
    Table table{{"t", "v", "metric_speed", "dt_dv"}, {}};
    double slowest_v = geo.start()(0);
    double slowest_density = 0.0;
    for (std::size_t i = 0; i < kRows; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(kRows - 1);
        const double v = geo.value(t)(0);
        const double density = 1.0 / std::abs(geo.velocity(t)(0));
        if (density > slowest_density) {
            slowest_density = density;
            slowest_v = v;
        }
        table.rows.push_back({t, v, profile.speed(t), density});
    }
    writer.table("geodesic", table);
    json extra;
    extra["kappa"] = kappa;
    extra["length"] = profile.length();
    extra["slowest_v"] = slowest_v;
    std::ostringstream report;
    report << "length " << profile.length() << ", slowest near v = " << slowest_v;
    return writer.finish("geodesic", extra, report.str());
}

CommandResult cmd_ising(const RunConfig& c, const std::string& subcommand)
{
    require_model(c, ModelType::Ising, "ising");
    Writer writer(c);
    const IsingModel base = ising_model(c.model);
    std::vector<double> betas = c.model.betas;

    if (subcommand == "magnetisation") {
        if (betas.empty()) betas = {0.01, 1.0, 100.0};
        Table table{{"h", "beta", "magnetisation"}, {}};
        const std::size_t points = c.model.field_points;
        for (double beta : betas) {
            IsingModel model = base;
            model.beta = beta;
            for (std::size_t i = 0; i < points; ++i) {
                const double h = base.h0 + (base.h1 - base.h0) * static_cast<double>(i) / as_double(points - 1);
                table.rows.push_back({h, beta, magnetisation(model, h)});
            }
        }
        writer.table("magnetisation", table);
        return writer.finish("ising magnetisation", json::object(),
                             std::to_string(table.rows.size()) + " magnetisation rows");
    }

    if (subcommand == "wdiss") {
        if (betas.empty()) betas = {base.beta};
        const NoiseSet noise{resolved_noise(c)};
        Table table{{"beta", "length", "noise_integral", "n_opt", "n_opt_int", "w_opt", "h_slowest"}, {}};
        for (double beta : betas) {
            IsingModel model = base;
            model.beta = beta;
            const MetricField g = ising_metric_field(model);
            const Path geo = geodesic(ising_linear_path(model, c.protocol.resolution), g, c.protocol.resolution);
            const OptimalSteps opt = optimal_steps(MetricProfile(geo, g), noise);
            double h_slowest = base.h0;
            double slowest = 0.0;
            for (std::size_t i = 0; i <= 1000; ++i) {
                const double t = static_cast<double>(i) / 1000.0;
                const double density = 1.0 / std::abs(geo.velocity(t)(0));
                if (density > slowest) {
                    slowest = density;
                    h_slowest = geo.value(t)(0);
                }
            }
            table.rows.push_back({beta, opt.length, opt.noise_integral, opt.n_real,
                                  opt.unbounded ? std::numeric_limits<double>::infinity() : as_double(opt.n_best),
                                  opt.w_opt, h_slowest});
        }
        writer.table("ising_wdiss", table);
        return writer.finish("ising wdiss", json::object(), std::to_string(table.rows.size()) + " temperature rows");
    }

    if (subcommand == "oracle-check") {
        constexpr std::size_t kSteps = 10;
        constexpr std::size_t kNoisyChains = 20;
        NoiseModel noise = resolved_noise(c);
        if (noise.silent()) noise = NoiseModel::gwn(0.05);
        const std::uint64_t seed = c.run.seed.value_or(0);
        Table table{{"L", "chain", "mode_wdiss", "bruteforce_wdiss", "abs_deviation"}, {}};
        double worst = 0.0;
        for (std::size_t L : {2u, 4u, 6u}) {
            IsingModel model = base;
            model.L = L;
            for (std::size_t chain = 0; chain <= kNoisyChains; ++chain) {
                std::vector<double> h(kSteps + 1);
                std::vector<double> xi(kSteps + 1, 0.0);
                if (chain > 0) xi = sample_noise_path(noise, kSteps, seed, chain - 1);
                for (std::size_t n = 0; n <= kSteps; ++n) {
                    h[n] = base.h0 + (base.h1 - base.h0) * as_double(n) / as_double(kSteps) + xi[n];
                }
                const double modes = ising_mode_exact_wdiss(model, h);
                const double brute = ising_bruteforce_wdiss(model, h);
                worst = std::max(worst, std::abs(modes - brute));
                table.rows.push_back({as_double(L), as_double(chain), modes, brute, std::abs(modes - brute)});
            }
        }
        writer.table("oracle_check", table);
        json extra;
        extra["max_deviation"] = worst;
        char buf[64];
        std::snprintf(buf, sizeof buf, "max deviation %.3e", worst);
        return writer.finish("ising oracle-check", extra, buf);
    }

    throw ConfigError(c.source, 0, "ising", "unknown subcommand '" + subcommand
                                                + "' (expected magnetisation | wdiss | oracle-check)");
}

CommandResult cmd_noise_check(const RunConfig& c)
{
    Writer writer(c);
    std::vector<NoiseModel> models;
    const NoiseModel configured = resolved_noise(c);
    if (configured.silent()) {
        models = {NoiseModel::gwn(0.05), NoiseModel::wiener(0.05), NoiseModel::ar1(0.05, 0.5),
                  NoiseModel::arn(0.05, {})};
    } else {
        models = {configured};
    }
    constexpr std::size_t kSteps = 16;
    const std::size_t trials = std::max<std::size_t>(c.run.trajectories, 20000);
    const std::uint64_t seed = c.run.seed.value_or(0);
    Table table{{"kind", "n", "analytic", "empirical", "rel_diff"}, {}};
    double worst = 0.0;
    for (const auto& model : models) {
        for (std::size_t n : {0u, 1u, 3u, 7u, 15u}) {
            const double analytic = increment_variance(model, n);
            const double empirical = empirical_increment_variance(model, kSteps, n, trials, seed);
            const double rel = std::abs(empirical - analytic) / analytic;
            worst = std::max(worst, rel);
            table.rows.push_back({to_string(model.kind), as_double(n), analytic, empirical, rel});
        }
    }
    writer.table("noise_check", table);
    json extra;
    extra["trials"] = trials;
    extra["max_rel_diff"] = worst;
    char buf[96];
    std::snprintf(buf, sizeof buf, "max relative deviation %.3e over %zu trials", worst, trials);
    return writer.finish("noise-check", extra, buf);
}

void write_outputs(const std::filesystem::path& dir, const OutputFiles& files)
{
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged;
    try {
        for (const auto& f : files) {
            const auto target = dir / f.name;
            auto temp = target;
            temp += ".tmp";
            std::ofstream out(temp, std::ios::binary | std::ios::trunc);
            out << f.content;
            out.close();
            if (!out) throw std::runtime_error("cannot write " + temp.string());
            staged.emplace_back(temp, target);
        }
    } catch (...) {
        for (const auto& [temp, target] : staged) std::filesystem::remove(temp);
        throw;
    }
    std::size_t placed = 0;
    try {
        for (; placed < staged.size(); ++placed) std::filesystem::rename(staged[placed].first, staged[placed].second);
    } catch (...) {
        std::error_code ec;
        for (std::size_t i = 0; i < staged.size(); ++i) {
            std::filesystem::remove(i < placed ? staged[i].second : staged[i].first, ec);
        }
        throw;
    }
}

} // namespace stepeq
