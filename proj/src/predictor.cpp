// predictor.cpp: linear-response predictions and work statistics

#include "stepeq/predictor.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stepeq {

namespace {

std::vector<GibbsState> chain_states(const StepSequence& seq)
{
    seq.validate();
    std::vector<GibbsState> states;
    states.reserve(seq.hamiltonians.size());
    for (const auto& h : seq.hamiltonians) states.push_back(gibbs_state(h, seq.beta));
    return states;
}

void check_lambda(double lambda)
{
    if (!(lambda >= kCgfLambdaMin && lambda <= kCgfLambdaMax)) {
        throw DomainError("cgf: lambda outside [" + std::to_string(kCgfLambdaMin) + ", "
                          + std::to_string(kCgfLambdaMax) + "]");
    }
}

bool stationary(const NoiseSet& noise)
{
    return std::none_of(noise.begin(), noise.end(),
                        [](const NoiseModel& m) { return m.kind == NoiseKind::ARn && !m.silent(); });
}

bool silent(const NoiseSet& noise)
{
    return std::all_of(noise.begin(), noise.end(), [](const NoiseModel& m) { return m.silent(); });
}

double frobenius(const RealMatrix& a, const RealMatrix& b) { return (a.array() * b.array()).sum(); }

} // namespace

void StepSequence::validate() const
{
    if (hamiltonians.size() < 2) throw ValidationError("StepSequence: need at least two Hamiltonians");
    for (const auto& h : hamiltonians) {
        if (h.dim() != hamiltonians.front().dim()) throw ValidationError("StepSequence: dimension mismatch");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("StepSequence: beta must be positive and finite");
}

StepSequence make_step_sequence(const ControlSchedule& schedule, const std::vector<RealVector>& points,
                                const NoiseTrajectory* noise)
{
    if (points.size() < 2) throw ValidationError("make_step_sequence: need at least two control points");
    if (noise != nullptr) {
        if (static_cast<Index>(noise->values.size()) != schedule.controls()) {
            throw ValidationError("make_step_sequence: noise has wrong number of controls");
        }
        if (noise->steps() + 1 != points.size()) {
            throw ValidationError("make_step_sequence: noise length differs from step count");
        }
    }
    StepSequence seq;
    seq.beta = schedule.beta;
    seq.hamiltonians.reserve(points.size());
    for (std::size_t n = 0; n < points.size(); ++n) {
        RealVector v = points[n];
        if (noise != nullptr) {
            for (Index j = 0; j < v.size(); ++j) v(j) += noise->values[static_cast<std::size_t>(j)][n];
        }
        seq.hamiltonians.push_back(schedule.hamiltonian(v));
    }
    return seq;
}

double exact_wdiss(std::span<const GibbsState> states)
{
    if (states.size() < 2) throw ValidationError("exact_wdiss: need at least two states");
    std::vector<double> terms(states.size() - 1);
    for (std::size_t n = 0; n + 1 < states.size(); ++n) terms[n] = relative_entropy(states[n], states[n + 1]);
    return numerics::pairwise_sum(terms) / states.front().beta;
}

double exact_wdiss(const StepSequence& seq)
{
    const auto states = chain_states(seq);
    return exact_wdiss(std::span<const GibbsState>(states));
}

// ---------------------------------------------------------------- linear response

std::vector<RealMatrix> increment_variance_tensors(const NoiseSet& noise, Index dims, std::size_t steps)
{
    std::vector<RealMatrix> out(steps, RealMatrix::Zero(dims, dims));
    if (noise.empty()) return out;
    if (static_cast<Index>(noise.size()) != dims) {
        throw ValidationError("noise: one model per control is required");
    }
    for (Index j = 0; j < dims; ++j) {
        const auto phi = increment_variances(noise[static_cast<std::size_t>(j)], steps);
        for (std::size_t n = 0; n < steps; ++n) out[n](j, j) = phi[n];
    }
    return out;
}

Prediction lr_wdiss_discrete(const MetricField& metric, const std::vector<RealVector>& points,
                             const std::vector<RealMatrix>& phi)
{
    if (points.size() < 2) throw DomainError("lr_wdiss_discrete: N must be at least 1");
    const std::size_t steps = points.size() - 1;
    if (phi.size() != steps) throw ValidationError("lr_wdiss_discrete: need one Phi tensor per step");
    std::vector<double> det(steps);
    std::vector<double> stoch(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        const RealMatrix g = metric(points[n]);
        const RealVector dv = points[n + 1] - points[n];
        det[n] = 0.5 * dv.dot(g * dv);
        stoch[n] = 0.5 * frobenius(g, phi[n]);
    }
    Prediction p;
    p.N = steps;
    p.wdiss_det = numerics::pairwise_sum(det);
    p.wdiss_stoch = numerics::pairwise_sum(stoch);
    p.wdiss_total = p.wdiss_det + p.wdiss_stoch;
    p.noise_integral = 2.0 * p.wdiss_stoch;
    return p;
}

Prediction lr_wdiss_discrete(const MetricField& metric, const std::vector<RealVector>& points,
                             const NoiseSet& noise)
{
    if (points.size() < 2) throw DomainError("lr_wdiss_discrete: N must be at least 1");
    return lr_wdiss_discrete(metric, points, increment_variance_tensors(noise, metric.dims, points.size() - 1));
}

double noise_integral(const MetricProfile& profile, const NoiseSet& noise, std::size_t steps)
{
    if (steps < 1) throw DomainError("noise_integral: N must be at least 1");
    if (silent(noise)) return 0.0;
    const Index d = profile.path().dims();
    if (stationary(noise)) {
        const auto phi = increment_variance_tensors(noise, d, 1);
        return frobenius(profile.metric_integral(0.0, 1.0), phi.front());
    }
    const auto phi = increment_variance_tensors(noise, d, steps);
    std::vector<double> terms(steps);
    const double dt = 1.0 / static_cast<double>(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t0 = static_cast<double>(n) * dt;
        const double t1 = n + 1 == steps ? 1.0 : static_cast<double>(n + 1) * dt;
        terms[n] = frobenius(profile.metric_integral(t0, t1), phi[n]);
    }
    return numerics::pairwise_sum(terms);
}

Prediction lr_wdiss_continuous(const MetricProfile& profile, std::size_t steps, const NoiseSet& noise)
{
    if (steps < 1) throw DomainError("lr_wdiss_continuous: N must be at least 1");
    const auto n = static_cast<double>(steps);
    Prediction p;
    p.N = steps;
    p.length = profile.length();
    p.noise_integral = noise_integral(profile, noise, steps);
    p.wdiss_det = profile.action() / (2.0 * n);
    p.wdiss_stoch = 0.5 * n * p.noise_integral;
    p.wdiss_total = p.wdiss_det + p.wdiss_stoch;
    return p;
}

OptimalSteps optimal_steps(const MetricProfile& profile, const NoiseSet& noise)
{
    OptimalSteps out;
    out.length = profile.length();
    double integral = noise_integral(profile, noise, 1);
    if (!stationary(noise)) {
        // Phi_n depends on n: iterate N -> L / sqrt(I(N)) until N repeats
        std::vector<std::size_t> seen;
        std::size_t n = 1;
        for (int iter = 0; iter < 200 && integral > 0.0; ++iter) {
            const double target = out.length / std::sqrt(integral);
            const auto next = static_cast<std::size_t>(std::max(1.0, std::round(target)));
            if (std::find(seen.begin(), seen.end(), next) != seen.end()) break;
            seen.push_back(next);
            n = next;
            integral = noise_integral(profile, noise, n);
        }
    }
    out.noise_integral = integral;
    if (!(integral > 0.0)) {
        out.unbounded = true;
        return out;
    }
    out.n_real = out.length / std::sqrt(integral);
    out.w_opt = out.length * std::sqrt(integral);
    out.n_floor = static_cast<std::size_t>(std::max(1.0, std::floor(out.n_real)));
    out.n_ceil = static_cast<std::size_t>(std::max(1.0, std::ceil(out.n_real)));
    out.w_floor = lr_wdiss_continuous(profile, out.n_floor, noise).wdiss_total;
    out.w_ceil = lr_wdiss_continuous(profile, out.n_ceil, noise).wdiss_total;
    out.n_best = out.w_ceil < out.w_floor ? out.n_ceil : out.n_floor;
    return out;
}

double lr_variance(const MetricProfile& fluctuation_profile, std::size_t steps, const NoiseSet& noise,
                   double beta)
{
    if (!(beta > 0.0)) throw DomainError("lr_variance: beta must be positive");
    return 2.0 / beta * lr_wdiss_continuous(fluctuation_profile, steps, noise).wdiss_total;
}

double lr_variance_discrete(const MetricField& fluctuation, const std::vector<RealVector>& points,
                            const std::vector<RealMatrix>& phi, double beta)
{
    if (!(beta > 0.0)) throw DomainError("lr_variance_discrete: beta must be positive");
    return 2.0 / beta * lr_wdiss_discrete(fluctuation, points, phi).wdiss_total;
}

KappaCost kappa_cost(const MetricField& g, const MetricField& m, const Path& path, std::size_t steps,
                     const NoiseSet& noise, double kappa, double beta, std::size_t resolution)
{
    const MetricField mix = mixture_metric_field(g, m, kappa);
    const Path optimal = geodesic(path, mix, resolution);
    const MetricProfile mix_profile(optimal, mix);

    KappaCost out;
    out.kappa = kappa;
    out.N = steps;
    out.wdiss = lr_wdiss_continuous(MetricProfile(optimal, g), steps, noise).wdiss_total;
    out.variance = lr_variance(MetricProfile(optimal, m), steps, noise, beta);
    out.cost = kappa * out.wdiss + (1.0 - kappa) * 0.5 * beta * out.variance;
    out.length = mix_profile.length();
    out.optimum = optimal_steps(mix_profile, noise);
    out.noise_integral = out.optimum.noise_integral;
    return out;
}

// ---------------------------------------------------------------- CGFs

double cgf_exact(std::span<const GibbsState> states, double lambda)
{
    check_lambda(lambda);
    if (states.size() < 2) throw ValidationError("cgf_exact: need at least two states");
    std::vector<double> terms(states.size() - 1);
    for (std::size_t n = 0; n + 1 < states.size(); ++n) {
        const GibbsState& before = states[n];
        const GibbsState& after = states[n + 1];
        if (before.clamped || after.clamped) throw DegenerateStateError("cgf_exact: state is rank deficient");
        const RealMatrix overlaps = basis_overlaps(before, after);
        // log sum_ab O_ab exp((1 - lambda) log p_a + lambda log q_b)
        double peak = -std::numeric_limits<double>::infinity();
        for (Index a = 0; a < before.dim(); ++a) {
            for (Index b = 0; b < after.dim(); ++b) {
                peak = std::max(peak, (1.0 - lambda) * before.log_populations(a) + lambda * after.log_populations(b));
            }
        }
        double sum = 0.0;
        for (Index a = 0; a < before.dim(); ++a) {
            for (Index b = 0; b < after.dim(); ++b) {
                sum += overlaps(a, b)
                     * std::exp((1.0 - lambda) * before.log_populations(a) + lambda * after.log_populations(b) - peak);
            }
        }
        terms[n] = std::log(sum) + peak;
    }
    return numerics::pairwise_sum(terms);
}

double cgf_exact(const StepSequence& seq, double lambda)
{
    const auto states = chain_states(seq);
    return cgf_exact(std::span<const GibbsState>(states), lambda);
}

double cov_y(const GibbsState& rho, const Matrix& a, const Matrix& b, double y)
{
    const Matrix at = in_eigenbasis(rho, a);
    const Matrix bt = in_eigenbasis(rho, b);
    double mean = 0.0;
    for (Index i = 0; i < rho.dim(); ++i) mean += rho.populations(i) * at(i, i).real();
    double total = 0.0;
    for (Index i = 0; i < rho.dim(); ++i) {
        for (Index j = 0; j < rho.dim(); ++j) {
            const Complex ai = i == j ? at(i, j) - mean : at(i, j);
            const double w = std::exp((1.0 - y) * rho.log_populations(i) + y * rho.log_populations(j));
            total += w * (ai * bt(j, i)).real();
        }
    }
    return total;
}

double cgf_double_integral(const std::function<double(double)>& f, double lambda, double shrink)
{
    check_lambda(lambda);
    if (lambda == 0.0) return 0.0;
    auto inner = [&](double x) {
        const double lo = x * shrink;
        const double hi = 1.0 - x * shrink;
        if (lo == hi) return 0.0;
        if (lo < hi) return numerics::integrate_adaptive(f, lo, hi, 1e-12, 1e-300, "cgf inner integral");
        return -numerics::integrate_adaptive(f, hi, lo, 1e-12, 1e-300, "cgf inner integral");
    };
    if (lambda > 0.0) return numerics::integrate_adaptive(inner, 0.0, lambda, 1e-11, 1e-300, "cgf outer integral");
    return -numerics::integrate_adaptive(inner, lambda, 0.0, 1e-11, 1e-300, "cgf outer integral");
}

double cgf_linear(const ControlSchedule& schedule, const std::vector<RealVector>& points,
                  const std::vector<RealMatrix>& phi, double lambda)
{
    check_lambda(lambda);
    if (points.size() < 2) throw DomainError("cgf_linear: N must be at least 1");
    const std::size_t steps = points.size() - 1;
    if (phi.size() != steps) throw ValidationError("cgf_linear: need one Phi tensor per step");
    const Index d = schedule.controls();
    const double beta = schedule.beta;

    std::vector<double> terms(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        const GibbsState state = schedule.gibbs(points[n]);
        if (state.clamped) throw DegenerateStateError("cgf_linear: state is rank deficient");
        const RealVector dv = points[n + 1] - points[n];
        const RealMatrix weights = dv * dv.transpose() + phi[n];

        // fold the control weights into one kernel M_ab = sum_ij c_ij A_i,ab A_j,ba
        std::vector<Matrix> rotated;
        for (Index i = 0; i < d; ++i) {
            Matrix a = in_eigenbasis(state, schedule.basis[static_cast<std::size_t>(i)].matrix());
            double mean = 0.0;
            for (Index k = 0; k < state.dim(); ++k) mean += state.populations(k) * a(k, k).real();
            for (Index k = 0; k < state.dim(); ++k) a(k, k) -= mean;
            rotated.push_back(std::move(a));
        }
        const Index dim = state.dim();
        RealMatrix kernel = RealMatrix::Zero(dim, dim);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                if (weights(i, j) == 0.0) continue;
                const Matrix& ai = rotated[static_cast<std::size_t>(i)];
                const Matrix& aj = rotated[static_cast<std::size_t>(j)];
                for (Index a = 0; a < dim; ++a) {
                    for (Index b = 0; b < dim; ++b) kernel(a, b) += weights(i, j) * (ai(a, b) * aj(b, a)).real();
                }
            }
        }
        const RealVector logp = state.log_populations;
        auto cov = [&kernel, &logp, dim](double y) {
            double total = 0.0;
            for (Index a = 0; a < dim; ++a) {
                for (Index b = 0; b < dim; ++b) {
                    if (kernel(a, b) != 0.0) total += kernel(a, b) * std::exp((1.0 - y) * logp(a) + y * logp(b));
                }
            }
            return total;
        };
        terms[n] = -0.5 * beta * beta * cgf_double_integral(cov, lambda);
    }
    return numerics::pairwise_sum(terms);
}

double cumulant(const std::function<double(double)>& cgf, int order, double beta)
{
    if (!(beta > 0.0)) throw DomainError("cumulant: beta must be positive");
    const double d = numerics::richardson_derivative(cgf, 0.0, order);
    return order == 1 ? -d / beta : d / (beta * beta);
}

// ---------------------------------------------------------------- TPMS

std::vector<WorkOutcome> tpms_distribution(const GibbsState& before, const GibbsState& after)
{
    if (before.dim() != after.dim()) throw ValidationError("tpms_distribution: dimension mismatch");
    const RealMatrix overlaps = basis_overlaps(before, after);
    std::vector<WorkOutcome> raw;
    raw.reserve(static_cast<std::size_t>(before.dim() * after.dim()));
    for (Index j = 0; j < before.dim(); ++j) {
        for (Index k = 0; k < after.dim(); ++k) {
            const double p = before.populations(j) * overlaps(j, k);
            // a tiny p can still carry weight q_k in <e^{-beta w}>, so only exact zeros go
            if (p == 0.0) continue;
            raw.push_back({(before.log_populations(j) - after.log_populations(k)) / before.beta, p});
        }
    }
    std::sort(raw.begin(), raw.end(), [](const WorkOutcome& a, const WorkOutcome& b) { return a.w < b.w; });
    std::vector<WorkOutcome> merged;
    for (const auto& o : raw) {
        if (!merged.empty() && std::abs(o.w - merged.back().w) <= 1e-12 * std::max(1.0, std::abs(o.w))) {
            merged.back().p += o.p;
        } else {
            merged.push_back(o);
        }
    }
    return merged;
}

std::vector<WorkOutcome> tpms_distribution(const HermitianOperator& h0, const HermitianOperator& h1, double beta)
{
    return tpms_distribution(gibbs_state(h0, beta), gibbs_state(h1, beta));
}

WorkMoments tpms_moments(std::span<const WorkOutcome> dist)
{
    WorkMoments m;
    for (const auto& o : dist) m.mean += o.p * o.w;
    for (const auto& o : dist) m.variance += o.p * (o.w - m.mean) * (o.w - m.mean);
    return m;
}

WorkMoments tpms_moments(const GibbsState& before, const GibbsState& after)
{
    if (before.dim() != after.dim()) throw ValidationError("tpms_moments: dimension mismatch");
    const RealMatrix overlaps = basis_overlaps(before, after);
    WorkMoments m;
    for (Index j = 0; j < before.dim(); ++j) {
        for (Index k = 0; k < after.dim(); ++k) {
            m.mean += before.populations(j) * overlaps(j, k)
                    * (before.log_populations(j) - after.log_populations(k));
        }
    }
    for (Index j = 0; j < before.dim(); ++j) {
        for (Index k = 0; k < after.dim(); ++k) {
            const double dw = before.log_populations(j) - after.log_populations(k) - m.mean;
            m.variance += before.populations(j) * overlaps(j, k) * dw * dw;
        }
    }
    m.mean /= before.beta;
    m.variance /= before.beta * before.beta;
    return m;
}

double exact_work_variance(std::span<const GibbsState> states)
{
    if (states.size() < 2) throw ValidationError("exact_work_variance: need at least two states");
    std::vector<double> terms(states.size() - 1);
    for (std::size_t n = 0; n + 1 < states.size(); ++n) terms[n] = tpms_moments(states[n], states[n + 1]).variance;
    return numerics::pairwise_sum(terms);
}

double exact_work_variance(const StepSequence& seq)
{
    const auto states = chain_states(seq);
    return exact_work_variance(std::span<const GibbsState>(states));
}

} // namespace stepeq
