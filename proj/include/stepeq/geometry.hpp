// geometry.hpp: thermodynamic metrics on control space, lengths and geodesics
//
// A control path t in [0, 1] -> v_t in R^d is stored as a dense sampling on a
// uniform grid and interpolated per component by a monotone cubic. Metrics are
// evaluated pointwise; the Kubo metric uses the logarithmic-mean closed form.

#pragma once

#include "stepeq/operator_core.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace stepeq {

inline constexpr std::size_t kDefaultPathResolution = 2048;

// Metric vanished on a parameter interval, so arc length cannot be inverted.
struct DegenerateGeodesicError : std::runtime_error {
    DegenerateGeodesicError(const std::string& what, double t0, double t1)
        : std::runtime_error(what), t_begin(t0), t_end(t1) {}
    double t_begin;
    double t_end;
};

class Path {
public:
    // samples: one row per grid point t_i = i/(M-1), one column per control.
    // Node derivatives are estimated by PCHIP.
    explicit Path(RealMatrix samples);
    // Cubic Hermite interpolation with the given node derivatives dv/dt.
    Path(RealMatrix samples, RealMatrix derivatives);

    static Path linear(const RealVector& start, const RealVector& end,
                       std::size_t resolution = kDefaultPathResolution);
    static Path from_function(const std::function<RealVector(double)>& f,
                              std::size_t resolution = kDefaultPathResolution);

    Index dims() const { return samples_.cols(); }
    std::size_t resolution() const { return static_cast<std::size_t>(samples_.rows()); }
    double grid_point(std::size_t i) const;
    const RealMatrix& samples() const { return samples_; }

    RealVector value(double t) const;
    RealVector velocity(double t) const;
    RealVector start() const { return samples_.row(0).transpose(); }
    RealVector end() const { return samples_.row(samples_.rows() - 1).transpose(); }

private:
    struct Interpolants;
    RealMatrix samples_;
    std::shared_ptr<const Interpolants> interp_;
};

// H(v) = offset + sum_j v^j V_j at inverse temperature beta.
struct ControlSchedule {
    std::vector<HermitianOperator> basis;
    HermitianOperator offset;
    Path path;
    double beta{1.0};

    Index controls() const { return static_cast<Index>(basis.size()); }
    Matrix hamiltonian_matrix(const RealVector& v) const;
    HermitianOperator hamiltonian(const RealVector& v) const;
    GibbsState gibbs(const RealVector& v) const;
    void validate() const;
};

enum class MetricKind { Kubo, Fluctuation, Mixture, Custom };

struct MetricField {
    MetricKind kind{MetricKind::Custom};
    Index dims{1};
    double kappa{1.0};   // Mixture only: kappa g + (1 - kappa) m
    std::function<RealMatrix(const RealVector&)> evaluate;

    RealMatrix operator()(const RealVector& v) const;
};

// g_ij = beta [ sum_ab LM(p_a, p_b) (V_i)_ab (V_j)_ba - <V_i><V_j> ]
RealMatrix kubo_metric(const GibbsState& state, const std::vector<HermitianOperator>& ops);
RealMatrix kubo_metric(const ControlSchedule& schedule, const RealVector& v);

// m_ij = beta ( Tr[{V_i, V_j} pi]/2 - <V_i><V_j> )
RealMatrix fluctuation_metric(const GibbsState& state, const std::vector<HermitianOperator>& ops);
RealMatrix fluctuation_metric(const ControlSchedule& schedule, const RealVector& v);

MetricField kubo_metric_field(const ControlSchedule& schedule);
MetricField fluctuation_metric_field(const ControlSchedule& schedule);
MetricField mixture_metric_field(const MetricField& g, const MetricField& m, double kappa);
MetricField constant_metric_field(const RealMatrix& g);

// Cumulative integrals of a metric along a path, tabulated at the path's grid
// points (Gauss-Legendre inside each cell) and interpolated by cubic Hermite
// between them.
class MetricProfile {
public:
    MetricProfile(Path path, MetricField metric);

    const Path& path() const { return path_; }
    const MetricField& metric() const { return metric_; }

    // Thermodynamic length  int_0^1 sqrt(g v' v') dt.
    double length() const { return arc_.back(); }
    // Action  int_0^1 g v' v' dt.
    double action() const { return action_.back(); }

    double arc_length(double t) const;
    double action_between(double t0, double t1) const;
    // int_{t0}^{t1} g_ij(v_t) dt
    RealMatrix metric_integral(double t0, double t1) const;
    double speed(double t) const;  // sqrt(g v' v') at t

    // Solves arc_length(t) = s for t; throws DegenerateGeodesicError when the
    // cumulative length is flat around s.
    double invert_arc_length(double s) const;
    // Throws DegenerateGeodesicError naming the first t-interval on which the
    // cumulative length does not grow.
    void require_nondegenerate() const;

private:
    Path path_;
    MetricField metric_;
    std::vector<double> arc_;        // cumulative length at grid points
    std::vector<double> speed_;      // sqrt(g v' v') at grid points
    std::vector<double> action_;     // cumulative action
    std::vector<double> action_rate_;
    std::vector<RealMatrix> metric_cum_;
    std::vector<RealMatrix> metric_at_;

    [[noreturn]] void throw_flat_stretch(std::size_t cell) const;
    double hermite(const std::vector<double>& cum, const std::vector<double>& rate, double t) const;
};

double path_length(const Path& path, const MetricField& metric);

// Arc-length reparametrisation of the one-dimensional segment between the
// path's endpoints; the result has constant metric speed equal to the length.
Path geodesic(const Path& path, const MetricField& metric,
              std::size_t resolution = kDefaultPathResolution);

// N+1 points with equal thermodynamic length per step; endpoints exact.
std::vector<RealVector> discretize_equal_length(const Path& path, const MetricField& metric,
                                                std::size_t steps);
std::vector<RealVector> discretize_equal_length(const MetricProfile& profile, std::size_t steps);

// N+1 points at uniform parameter spacing t_n = n/N.
std::vector<RealVector> discretize_uniform(const Path& path, std::size_t steps);

} // namespace stepeq
