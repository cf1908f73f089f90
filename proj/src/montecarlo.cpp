// montecarlo.cpp: ensemble runner with deterministic reduction

#include "stepeq/montecarlo.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace stepeq {

namespace {

std::vector<RealVector> noisy_points(const std::vector<RealVector>& points, const NoiseTrajectory* noise)
{
    if (noise == nullptr) return points;
    if (noise->steps() + 1 != points.size()) throw ValidationError("noise length differs from step count");
    std::vector<RealVector> out = points;
    for (std::size_t n = 0; n < out.size(); ++n) {
        for (Index j = 0; j < out[n].size(); ++j) out[n](j) += noise->values[static_cast<std::size_t>(j)][n];
    }
    return out;
}

bool silent(const NoiseSet& noise)
{
    return std::all_of(noise.begin(), noise.end(), [](const NoiseModel& m) { return m.silent(); });
}

} // namespace

ScheduleChain::ScheduleChain(ControlSchedule schedule) : schedule_(std::move(schedule))
{
    schedule_.validate();
}

ChainResult ScheduleChain::evaluate(const std::vector<RealVector>& points, const NoiseTrajectory* noise,
                                    bool tpms) const
{
    const auto seq = make_step_sequence(schedule_, points, noise);
    std::vector<GibbsState> states;
    states.reserve(seq.hamiltonians.size());
    for (const auto& h : seq.hamiltonians) states.push_back(gibbs_state(h, seq.beta));
    ChainResult r;
    r.wdiss = exact_wdiss(std::span<const GibbsState>(states));
    if (tpms) r.tpms_variance = exact_work_variance(std::span<const GibbsState>(states));
    return r;
}

IsingModeChain::IsingModeChain(IsingModel model) : model_(model)
{
    model_.validate();
    if (model_.infinite()) throw DomainError("IsingModeChain: requires a finite chain length");
    if (!(model_.beta > 0.0)) throw DomainError("IsingModeChain: beta must be positive");
    momenta_ = momentum_grid(model_);
}

ChainResult IsingModeChain::evaluate(const std::vector<RealVector>& points, const NoiseTrajectory* noise,
                                     bool tpms) const
{
    const auto noisy = noisy_points(points, noise);
    std::vector<double> wd;
    std::vector<double> var;
    std::vector<GibbsState> states(noisy.size());
    for (double k : momenta_) {
        for (std::size_t n = 0; n < noisy.size(); ++n) states[n] = ising_mode_gibbs(model_, k, noisy[n](0));
        wd.push_back(exact_wdiss(std::span<const GibbsState>(states)));
        if (tpms) var.push_back(exact_work_variance(std::span<const GibbsState>(states)));
    }
    const double L = static_cast<double>(model_.L);
    ChainResult r;
    r.wdiss = numerics::pairwise_sum(wd) / L;
    if (tpms) r.tpms_variance = numerics::pairwise_sum(var) / L;
    return r;
}

EnsembleStats run_ensemble(const ChainModel& model, const std::vector<RealVector>& points,
                           const NoiseSet& noise, const EnsembleOptions& options)
{
    if (options.trajectories < 1) throw DomainError("run_ensemble: need at least one trajectory");
    if (points.size() < 2) throw DomainError("run_ensemble: N must be at least 1");
    if (!noise.empty() && static_cast<Index>(noise.size()) != model.controls()) {
        throw ValidationError("run_ensemble: one noise model per control is required");
    }
    const std::size_t steps = points.size() - 1;
    const std::size_t r = options.trajectories;

    EnsembleStats stats;
    stats.N = steps;
    stats.trajectories = r;
    stats.seed = options.seed;

    if (silent(noise)) {
        // every trajectory is the deterministic chain
        const ChainResult single = model.evaluate(points, nullptr, options.tpms);
        stats.mean_wdiss = single.wdiss;
        stats.mean_tpms_variance = single.tpms_variance;
        return stats;
    }

    std::vector<double> wdiss(r);
    std::vector<double> variance(r);
    std::vector<std::exception_ptr> failures(r);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < r; i += stride) {
            try {
                const NoiseTrajectory traj = sample_trajectory(noise, steps, options.seed, i);
                const ChainResult res = model.evaluate(points, &traj, options.tpms);
                wdiss[i] = res.wdiss;
                variance[i] = res.tpms_variance;
            } catch (...) {
                failures[i] = std::current_exception();
                return;
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(r)));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }
    for (std::size_t i = 0; i < r; ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("trajectory " + std::to_string(i) + " (N = " + std::to_string(steps)
                                     + ", seed = " + std::to_string(options.seed) + ") failed: " + e.what());
        }
    }

    stats.mean_wdiss = numerics::pairwise_sum(wdiss) / static_cast<double>(r);
    if (r > 1) {
        std::vector<double> sq(r);
        for (std::size_t i = 0; i < r; ++i) sq[i] = (wdiss[i] - stats.mean_wdiss) * (wdiss[i] - stats.mean_wdiss);
        stats.var_wdiss = numerics::pairwise_sum(sq) / static_cast<double>(r - 1);
    }
    stats.std_error = std::sqrt(stats.var_wdiss / static_cast<double>(r));
    if (options.tpms) stats.mean_tpms_variance = numerics::pairwise_sum(variance) / static_cast<double>(r);
    return stats;
}

EnsembleStats run_tpms_ensemble(const ChainModel& model, const std::vector<RealVector>& points,
                                const NoiseSet& noise, EnsembleOptions options)
{
    options.tpms = true;
    return run_ensemble(model, points, noise, options);
}

SweepResult sweep_n(const ChainModel& model, const Discretizer& discretize, const NoiseSet& noise,
                    const std::vector<std::size_t>& n_grid, const EnsembleOptions& options,
                    const Predictor& predict)
{
    if (n_grid.empty()) throw DomainError("sweep_n: N grid is empty");
    SweepResult out;
    for (std::size_t N : n_grid) {
        SweepRow row;
        row.stats = run_ensemble(model, discretize(N), noise, options);
        if (predict) row.prediction = predict(N);
        out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        if (out.rows[i].stats.mean_wdiss < out.rows[out.argmin].stats.mean_wdiss) out.argmin = i;
    }
    return out;
}

} // namespace stepeq
