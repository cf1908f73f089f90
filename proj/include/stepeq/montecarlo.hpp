// montecarlo.hpp: trajectory ensembles of noisy step-equilibration chains

#pragma once

#include "stepeq/geometry.hpp"
#include "stepeq/ising.hpp"
#include "stepeq/noise.hpp"
#include "stepeq/predictor.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace stepeq {

struct ChainResult {
    double wdiss{0.0};
    double tpms_variance{0.0};
};

// Turns control points plus a noise realisation into the exact dissipation of
// the noisy chain (sample-and-hold: H_n is built from v_n + xi_n).
class ChainModel {
public:
    virtual ~ChainModel() = default;
    virtual Index controls() const = 0;
    virtual double beta() const = 0;
    virtual ChainResult evaluate(const std::vector<RealVector>& points, const NoiseTrajectory* noise,
                                 bool tpms) const = 0;
};

class ScheduleChain final : public ChainModel {
public:
    explicit ScheduleChain(ControlSchedule schedule);
    Index controls() const override { return schedule_.controls(); }
    double beta() const override { return schedule_.beta; }
    ChainResult evaluate(const std::vector<RealVector>& points, const NoiseTrajectory* noise,
                         bool tpms) const override;

private:
    ControlSchedule schedule_;
};

// Finite TFIM through its independent 4-dim mode blocks; results are per site.
class IsingModeChain final : public ChainModel {
public:
    explicit IsingModeChain(IsingModel model);
    Index controls() const override { return 1; }
    double beta() const override { return model_.beta; }
    ChainResult evaluate(const std::vector<RealVector>& points, const NoiseTrajectory* noise,
                         bool tpms) const override;

private:
    IsingModel model_;
    std::vector<double> momenta_;
};

struct EnsembleOptions {
    std::size_t trajectories{1};
    std::uint64_t seed{0};
    unsigned threads{1};
    bool tpms{false};
};

struct EnsembleStats {
    std::size_t N{0};
    std::size_t trajectories{0};
    double mean_wdiss{0.0};
    double var_wdiss{0.0};            // across-trajectory sample variance of W
    double mean_tpms_variance{0.0};   // trajectory average of the TPMS work variance
    double std_error{0.0};            // sqrt(var_wdiss / r)
    std::uint64_t seed{0};
};

// Trajectory i draws its noise from substream (seed, i). Sums run in
// trajectory-index order, so the result does not depend on the thread count.
EnsembleStats run_ensemble(const ChainModel& model, const std::vector<RealVector>& points,
                           const NoiseSet& noise, const EnsembleOptions& options);
EnsembleStats run_tpms_ensemble(const ChainModel& model, const std::vector<RealVector>& points,
                                const NoiseSet& noise, EnsembleOptions options);

struct SweepRow {
    EnsembleStats stats;
    Prediction prediction;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t argmin{0};   // row index of the smallest mean_wdiss
};

using Discretizer = std::function<std::vector<RealVector>(std::size_t)>;
using Predictor = std::function<Prediction(std::size_t)>;

SweepResult sweep_n(const ChainModel& model, const Discretizer& discretize, const NoiseSet& noise,
                    const std::vector<std::size_t>& n_grid, const EnsembleOptions& options,
                    const Predictor& predict = {});

} // namespace stepeq
