// geometry.cpp: paths, metric tensors, arc length and geodesic reparametrisation

#include "stepeq/geometry.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/numerics.hpp"

#include <math.h>  // boost 1.74 pchip calls unqualified isnan

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace stepeq {

// ---------------------------------------------------------------- Path

struct Path::Interpolants {
    std::vector<std::function<double(double)>> value;
    std::vector<std::function<double(double)>> prime;
};

namespace {

double clamp_unit(double t) { return std::clamp(t, 0.0, 1.0); }

std::vector<double> uniform_grid(std::size_t m)
{
    std::vector<double> t(m);
    for (std::size_t i = 0; i < m; ++i) t[i] = static_cast<double>(i) / static_cast<double>(m - 1);
    t.back() = 1.0;
    return t;
}

} // namespace

Path::Path(RealMatrix samples) : samples_(std::move(samples))
{
    const auto m = static_cast<std::size_t>(samples_.rows());
    if (m < 4) throw DomainError("Path: need at least 4 samples for monotone interpolation");
    if (samples_.cols() < 1) throw DomainError("Path: need at least one control");
    if (!samples_.allFinite()) throw ValidationError("Path: non-finite samples");

    auto interp = std::make_shared<Interpolants>();
    const double h = 1.0 / static_cast<double>(m - 1);
    for (Index j = 0; j < samples_.cols(); ++j) {
        std::vector<double> y(m);
        for (std::size_t i = 0; i < m; ++i) y[i] = samples_(static_cast<Index>(i), j);
        // second-order one-sided endpoint slopes
        const double left = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
        const double right = (3.0 * y[m - 1] - 4.0 * y[m - 2] + y[m - 3]) / (2.0 * h);
        boost::math::interpolators::pchip<std::vector<double>> spline(uniform_grid(m), std::move(y), left, right);
        interp->value.emplace_back([spline](double t) { return spline(t); });
        interp->prime.emplace_back([spline](double t) { return spline.prime(t); });
    }
    interp_ = std::move(interp);
}

Path::Path(RealMatrix samples, RealMatrix derivatives) : samples_(std::move(samples))
{
    const auto m = static_cast<std::size_t>(samples_.rows());
    if (m < 2) throw DomainError("Path: need at least 2 samples");
    if (derivatives.rows() != samples_.rows() || derivatives.cols() != samples_.cols()) {
        throw ValidationError("Path: derivative table shape mismatch");
    }
    if (!samples_.allFinite() || !derivatives.allFinite()) throw ValidationError("Path: non-finite samples");

    auto interp = std::make_shared<Interpolants>();
    const double h = 1.0 / static_cast<double>(m - 1);
    for (Index j = 0; j < samples_.cols(); ++j) {
        std::vector<double> y(m);
        std::vector<double> dy(m);
        for (std::size_t i = 0; i < m; ++i) {
            y[i] = samples_(static_cast<Index>(i), j);
            dy[i] = derivatives(static_cast<Index>(i), j);
        }
        boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> spline(
            std::move(y), std::move(dy), 0.0, h);
        interp->value.emplace_back([spline](double t) { return spline(t); });
        interp->prime.emplace_back([spline](double t) { return spline.prime(t); });
    }
    interp_ = std::move(interp);
}

Path Path::linear(const RealVector& start, const RealVector& end, std::size_t resolution)
{
    if (start.size() != end.size()) throw ValidationError("Path::linear: endpoint dimension mismatch");
    if (resolution < 2) throw DomainError("Path::linear: resolution must be at least 2");
    const auto m = static_cast<Index>(resolution);
    RealMatrix samples(m, start.size());
    RealMatrix derivs(m, start.size());
    for (Index i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(m - 1);
        samples.row(i) = ((1.0 - t) * start + t * end).transpose();
        derivs.row(i) = (end - start).transpose();
    }
    samples.row(m - 1) = end.transpose();
    return Path(std::move(samples), std::move(derivs));
}

Path Path::from_function(const std::function<RealVector(double)>& f, std::size_t resolution)
{
    if (resolution < 4) throw DomainError("Path::from_function: resolution must be at least 4");
    const RealVector first = f(0.0);
    RealMatrix samples(static_cast<Index>(resolution), first.size());
    const auto grid = uniform_grid(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        samples.row(static_cast<Index>(i)) = f(grid[i]).transpose();
    }
    return Path(std::move(samples));
}

double Path::grid_point(std::size_t i) const
{
    return static_cast<double>(i) / static_cast<double>(resolution() - 1);
}

RealVector Path::value(double t) const
{
    t = clamp_unit(t);
    if (t == 1.0) return end();
    RealVector v(dims());
    for (Index j = 0; j < dims(); ++j) v(j) = interp_->value[static_cast<std::size_t>(j)](t);
    return v;
}

RealVector Path::velocity(double t) const
{
    t = clamp_unit(t);
    RealVector v(dims());
    for (Index j = 0; j < dims(); ++j) v(j) = interp_->prime[static_cast<std::size_t>(j)](t);
    return v;
}

// ---------------------------------------------------------------- schedule

Matrix ControlSchedule::hamiltonian_matrix(const RealVector& v) const
{
    if (v.size() != controls()) throw ValidationError("ControlSchedule: control vector has wrong dimension");
    Matrix h = offset.matrix();
    for (Index j = 0; j < controls(); ++j) h += v(j) * basis[static_cast<std::size_t>(j)].matrix();
    return h;
}

HermitianOperator ControlSchedule::hamiltonian(const RealVector& v) const
{
    return HermitianOperator(hamiltonian_matrix(v));
}

GibbsState ControlSchedule::gibbs(const RealVector& v) const
{
    return gibbs_state(hamiltonian(v), beta);
}

void ControlSchedule::validate() const
{
    if (basis.empty()) throw ValidationError("ControlSchedule: need at least one control operator");
    for (const auto& op : basis) {
        if (op.dim() != offset.dim()) throw ValidationError("ControlSchedule: operator dimension mismatch");
    }
    if (path.dims() != controls()) throw ValidationError("ControlSchedule: path dimension differs from control count");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("ControlSchedule: beta must be positive and finite");
}

// ---------------------------------------------------------------- metrics

namespace {

std::vector<Matrix> centred_in_eigenbasis(const GibbsState& state, const std::vector<HermitianOperator>& ops)
{
    std::vector<Matrix> out;
    out.reserve(ops.size());
    for (const auto& op : ops) {
        Matrix rotated = in_eigenbasis(state, op.matrix());
        double mean = 0.0;
        for (Index a = 0; a < state.dim(); ++a) mean += state.populations(a) * rotated(a, a).real();
        for (Index a = 0; a < state.dim(); ++a) rotated(a, a) -= mean;
        out.push_back(std::move(rotated));
    }
    return out;
}

template <class Weight>
RealMatrix weighted_covariance(const GibbsState& state, const std::vector<HermitianOperator>& ops, Weight weight)
{
    if (state.clamped) throw DegenerateStateError("metric: Gibbs state is rank deficient");
    const auto centred = centred_in_eigenbasis(state, ops);
    const auto d = static_cast<Index>(ops.size());
    const Index n = state.dim();
    RealMatrix w(n, n);
    for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b < n; ++b) w(a, b) = weight(state.populations(a), state.populations(b));
    }
    RealMatrix g(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = i; j < d; ++j) {
            const Matrix& A = centred[static_cast<std::size_t>(i)];
            const Matrix& B = centred[static_cast<std::size_t>(j)];
            double total = 0.0;
            for (Index a = 0; a < n; ++a) {
                for (Index b = 0; b < n; ++b) total += w(a, b) * (A(a, b) * B(b, a)).real();
            }
            g(i, j) = state.beta * total;
            g(j, i) = g(i, j);
        }
    }
    return g;
}

} // namespace

RealMatrix kubo_metric(const GibbsState& state, const std::vector<HermitianOperator>& ops)
{
    return weighted_covariance(state, ops, [](double p, double q) { return log_mean(p, q); });
}

RealMatrix fluctuation_metric(const GibbsState& state, const std::vector<HermitianOperator>& ops)
{
    return weighted_covariance(state, ops, [](double p, double q) { return 0.5 * (p + q); });
}

RealMatrix kubo_metric(const ControlSchedule& schedule, const RealVector& v)
{
    return kubo_metric(schedule.gibbs(v), schedule.basis);
}

RealMatrix fluctuation_metric(const ControlSchedule& schedule, const RealVector& v)
{
    return fluctuation_metric(schedule.gibbs(v), schedule.basis);
}

RealMatrix MetricField::operator()(const RealVector& v) const
{
    RealMatrix g = evaluate(v);
    if (!g.allFinite()) throw DomainError("metric: non-finite value along path");
    return g;
}

MetricField kubo_metric_field(const ControlSchedule& schedule)
{
    schedule.validate();
    return {MetricKind::Kubo, schedule.controls(), 1.0,
            [schedule](const RealVector& v) { return kubo_metric(schedule, v); }};
}

MetricField fluctuation_metric_field(const ControlSchedule& schedule)
{
    schedule.validate();
    return {MetricKind::Fluctuation, schedule.controls(), 0.0,
            [schedule](const RealVector& v) { return fluctuation_metric(schedule, v); }};
}

MetricField mixture_metric_field(const MetricField& g, const MetricField& m, double kappa)
{
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw DomainError("mixture metric: kappa must lie in [0, 1]");
    if (g.dims != m.dims) throw ValidationError("mixture metric: dimension mismatch");
    if (kappa == 1.0) return {MetricKind::Mixture, g.dims, 1.0, g.evaluate};
    if (kappa == 0.0) return {MetricKind::Mixture, g.dims, 0.0, m.evaluate};
    return {MetricKind::Mixture, g.dims, kappa,
            [g, m, kappa](const RealVector& v) { return RealMatrix(kappa * g(v) + (1.0 - kappa) * m(v)); }};
}

MetricField constant_metric_field(const RealMatrix& g)
{
    if (g.rows() != g.cols()) throw ValidationError("constant metric: matrix must be square");
    return {MetricKind::Custom, g.rows(), 1.0, [g](const RealVector&) { return g; }};
}

// ---------------------------------------------------------------- profile

namespace {
constexpr int kCellNodes = 4;
} // namespace

MetricProfile::MetricProfile(Path path, MetricField metric)
    : path_(std::move(path)), metric_(std::move(metric))
{
    if (metric_.dims != path_.dims()) throw ValidationError("MetricProfile: metric and path dimensions differ");
    const std::size_t m = path_.resolution();
    const auto& rule = numerics::gauss_legendre(kCellNodes);
    const double h = 1.0 / static_cast<double>(m - 1);
    const Index d = path_.dims();

    auto sample = [&](double t, double& speed, double& rate, RealMatrix& g) {
        const RealVector v = path_.value(t);
        const RealVector vd = path_.velocity(t);
        g = metric_(v);
        rate = vd.dot(g * vd);
        speed = std::sqrt(std::max(0.0, rate));
    };

    arc_.assign(m, 0.0);
    action_.assign(m, 0.0);
    speed_.assign(m, 0.0);
    action_rate_.assign(m, 0.0);
    metric_cum_.assign(m, RealMatrix::Zero(d, d));
    metric_at_.assign(m, RealMatrix::Zero(d, d));

    for (std::size_t i = 0; i < m; ++i) {
        sample(path_.grid_point(i), speed_[i], action_rate_[i], metric_at_[i]);
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a = path_.grid_point(i);
        double arc = 0.0;
        double act = 0.0;
        RealMatrix cell = RealMatrix::Zero(d, d);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = a + 0.5 * h * (1.0 + rule.nodes[q]);
            double speed = 0.0;
            double rate = 0.0;
            RealMatrix g;
            sample(t, speed, rate, g);
            arc += rule.weights[q] * speed;
            act += rule.weights[q] * rate;
            cell += rule.weights[q] * g;
        }
        arc_[i + 1] = arc_[i] + 0.5 * h * arc;
        action_[i + 1] = action_[i] + 0.5 * h * act;
        metric_cum_[i + 1] = metric_cum_[i] + 0.5 * h * cell;
    }
}

double MetricProfile::hermite(const std::vector<double>& cum, const std::vector<double>& rate, double t) const
{
    t = clamp_unit(t);
    const std::size_t m = cum.size();
    const double h = 1.0 / static_cast<double>(m - 1);
    auto i = static_cast<std::size_t>(std::floor(t / h));
    if (i >= m - 1) return cum.back();
    const double u = (t - static_cast<double>(i) * h) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * cum[i] + (u3 - 2 * u2 + u) * h * rate[i]
         + (-2 * u3 + 3 * u2) * cum[i + 1] + (u3 - u2) * h * rate[i + 1];
}

double MetricProfile::arc_length(double t) const { return hermite(arc_, speed_, t); }

double MetricProfile::action_between(double t0, double t1) const
{
    return hermite(action_, action_rate_, t1) - hermite(action_, action_rate_, t0);
}

RealMatrix MetricProfile::metric_integral(double t0, double t1) const
{
    const Index d = path_.dims();
    RealMatrix out(d, d);
    std::vector<double> cum(metric_cum_.size());
    std::vector<double> rate(metric_cum_.size());
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            for (std::size_t k = 0; k < cum.size(); ++k) {
                cum[k] = metric_cum_[k](i, j);
                rate[k] = metric_at_[k](i, j);
            }
            out(i, j) = hermite(cum, rate, t1) - hermite(cum, rate, t0);
        }
    }
    return out;
}

double MetricProfile::speed(double t) const
{
    const RealVector v = path_.value(t);
    const RealVector vd = path_.velocity(t);
    return std::sqrt(std::max(0.0, vd.dot(metric_(v) * vd)));
}

void MetricProfile::throw_flat_stretch(std::size_t i) const
{
    const double flat = 1e-14 * length();
    const std::size_t m = arc_.size();
    const double h = 1.0 / static_cast<double>(m - 1);
    std::size_t lo = i;
    std::size_t hi = i + 1;
    while (lo > 0 && arc_[lo] - arc_[lo - 1] <= flat) --lo;
    while (hi + 1 < m && arc_[hi + 1] - arc_[hi] <= flat) ++hi;
    const double t0 = static_cast<double>(lo) * h;
    const double t1 = static_cast<double>(hi) * h;
    throw DegenerateGeodesicError("geodesic: metric vanishes on t in [" + std::to_string(t0) + ", "
                                      + std::to_string(t1) + "]", t0, t1);
}

void MetricProfile::require_nondegenerate() const
{
    const double total = length();
    if (!(total > 0.0)) throw DegenerateGeodesicError("geodesic: path has zero thermodynamic length", 0.0, 1.0);
    for (std::size_t i = 0; i + 1 < arc_.size(); ++i) {
        if (arc_[i + 1] - arc_[i] <= 1e-14 * total) throw_flat_stretch(i);
    }
}

double MetricProfile::invert_arc_length(double s) const
{
    const double total = length();
    if (!(total > 0.0)) throw DegenerateGeodesicError("geodesic: path has zero thermodynamic length", 0.0, 1.0);
    s = std::clamp(s, 0.0, total);
    const std::size_t m = arc_.size();
    const double h = 1.0 / static_cast<double>(m - 1);
    auto upper = std::lower_bound(arc_.begin(), arc_.end(), s);
    std::size_t i = upper == arc_.begin() ? 0 : static_cast<std::size_t>(upper - arc_.begin()) - 1;
    if (i >= m - 1) i = m - 2;
    if (arc_[i + 1] - arc_[i] <= 1e-14 * total) throw_flat_stretch(i);
    double lo = static_cast<double>(i) * h;
    double hi = static_cast<double>(i + 1) * h;
    for (int iter = 0; iter < 64; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (arc_length(mid) < s) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------- operations

double path_length(const Path& path, const MetricField& metric)
{
    if (path.resolution() < 16) throw DomainError("path_length: resolution must be at least 16");
    return MetricProfile(path, metric).length();
}

Path geodesic(const Path& path, const MetricField& metric, std::size_t resolution)
{
    if (path.dims() != 1) throw DomainError("geodesic: only one-dimensional control spaces are supported");
    if (resolution < 16) throw DomainError("geodesic: resolution must be at least 16");
    const MetricProfile profile(Path::linear(path.start(), path.end(), resolution), metric);
    profile.require_nondegenerate();
    const double total = profile.length();

    const auto m = static_cast<Index>(resolution);
    RealMatrix samples(m, 1);
    RealMatrix derivs(m, 1);
    for (Index i = 0; i < m; ++i) {
        const double s = total * static_cast<double>(i) / static_cast<double>(m - 1);
        const double tau = i == 0 ? 0.0 : (i == m - 1 ? 1.0 : profile.invert_arc_length(s));
        const double speed = profile.speed(tau);
        if (!(speed > 0.0)) {
            throw DegenerateGeodesicError("geodesic: metric vanishes at t = " + std::to_string(tau), tau, tau);
        }
        samples(i, 0) = profile.path().value(tau)(0);
        derivs(i, 0) = total * profile.path().velocity(tau)(0) / speed;
    }
    samples(0, 0) = path.start()(0);
    samples(m - 1, 0) = path.end()(0);
    return Path(std::move(samples), std::move(derivs));
}

std::vector<RealVector> discretize_equal_length(const MetricProfile& profile, std::size_t steps)
{
    if (steps < 1) throw DomainError("discretize_equal_length: N must be at least 1");
    profile.require_nondegenerate();
    const double total = profile.length();
    std::vector<RealVector> points;
    points.reserve(steps + 1);
    points.push_back(profile.path().start());
    for (std::size_t n = 1; n < steps; ++n) {
        const double s = total * static_cast<double>(n) / static_cast<double>(steps);
        points.push_back(profile.path().value(profile.invert_arc_length(s)));
    }
    points.push_back(profile.path().end());
    return points;
}

std::vector<RealVector> discretize_equal_length(const Path& path, const MetricField& metric, std::size_t steps)
{
    return discretize_equal_length(MetricProfile(path, metric), steps);
}

std::vector<RealVector> discretize_uniform(const Path& path, std::size_t steps)
{
    if (steps < 1) throw DomainError("discretize_uniform: N must be at least 1");
    std::vector<RealVector> points;
    points.reserve(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        points.push_back(path.value(static_cast<double>(n) / static_cast<double>(steps)));
    }
    points.back() = path.end();
    return points;
}

} // namespace stepeq
