// predictor.hpp: exact and linear-response dissipation, optimal step counts,
// work variance, kappa-interpolated cost and cumulant generating functions

#pragma once

#include "stepeq/geometry.hpp"
#include "stepeq/noise.hpp"
#include "stepeq/operator_core.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace stepeq {

struct StepSequence {
    std::vector<HermitianOperator> hamiltonians;  // H_0 .. H_N
    double beta{1.0};

    std::size_t steps() const { return hamiltonians.empty() ? 0 : hamiltonians.size() - 1; }
    void validate() const;
};

// H_n = offset + sum_j (v_n^j + xi_n^j) V_j. Noise is optional.
StepSequence make_step_sequence(const ControlSchedule& schedule, const std::vector<RealVector>& points,
                                const NoiseTrajectory* noise = nullptr);

// (1/beta) sum_n S(pi_n || pi_{n+1})
double exact_wdiss(const StepSequence& seq);
double exact_wdiss(std::span<const GibbsState> states);

struct Prediction {
    std::size_t N{0};
    double wdiss_det{0.0};
    double wdiss_stoch{0.0};
    double wdiss_total{0.0};
    double length{0.0};
    double noise_integral{0.0};   // int g_ij Phi^ij dt (continuous) or sum_n g Phi_n (discrete)
    double variance{0.0};         // filled by callers that also evaluate lr_variance
};

// Per-step increment variance tensors Phi_0 .. Phi_{N-1}.
std::vector<RealMatrix> increment_variance_tensors(const NoiseSet& noise, Index dims, std::size_t steps);

// 1/2 sum_n g_ij(v_n) [dv^i dv^j + Phi_n^ij]
Prediction lr_wdiss_discrete(const MetricField& metric, const std::vector<RealVector>& points,
                             const std::vector<RealMatrix>& phi);
Prediction lr_wdiss_discrete(const MetricField& metric, const std::vector<RealVector>& points,
                             const NoiseSet& noise);

// int_0^1 g_ij Phi_t^ij dt with Phi_t held at Phi_n on [n/N, (n+1)/N).
double noise_integral(const MetricProfile& profile, const NoiseSet& noise, std::size_t steps);

// 1/2 int_0^1 [g v' v' / N + N g Phi_t] dt
Prediction lr_wdiss_continuous(const MetricProfile& profile, std::size_t steps, const NoiseSet& noise);

struct OptimalSteps {
    bool unbounded{false};   // zero noise: dissipation decreases for all N
    double n_real{std::numeric_limits<double>::infinity()};
    double w_opt{0.0};
    double length{0.0};
    double noise_integral{0.0};
    std::size_t n_floor{0};
    std::size_t n_ceil{0};
    double w_floor{0.0};
    double w_ceil{0.0};
    std::size_t n_best{0};   // the lower-cost of the two integers
};

// n_opt = L / sqrt(int g Phi), w_opt = L sqrt(int g Phi). The profile should
// follow the geodesic. For noise whose Phi_n depends on n the noise integral
// is iterated to a fixed point in N.
OptimalSteps optimal_steps(const MetricProfile& profile, const NoiseSet& noise);

// (1/beta) int_0^1 [m v' v' / N + N m Phi_t] dt, profile built on the
// fluctuation metric.
double lr_variance(const MetricProfile& fluctuation_profile, std::size_t steps, const NoiseSet& noise,
                   double beta);
// (1/beta) sum_n m_ij(v_n) [dv^i dv^j + Phi_n^ij]
double lr_variance_discrete(const MetricField& fluctuation, const std::vector<RealVector>& points,
                            const std::vector<RealMatrix>& phi, double beta);

struct KappaCost {
    double kappa{1.0};
    std::size_t N{0};
    double cost{0.0};              // kappa <W> + (1 - kappa) beta/2 <sigma_W^2>
    double wdiss{0.0};
    double variance{0.0};
    double length{0.0};            // mixture-metric length
    double noise_integral{0.0};    // int (kappa g + (1 - kappa) m) Phi dt
    OptimalSteps optimum;          // in the mixture metric
};

// Evaluated on the geodesic of kappa g + (1 - kappa) m between the path's endpoints.
KappaCost kappa_cost(const MetricField& g, const MetricField& m, const Path& path, std::size_t steps,
                     const NoiseSet& noise, double kappa, double beta,
                     std::size_t resolution = kDefaultPathResolution);

// ---------------------------------------------------------------- CGFs

// Lambda range accepted by the CGFs; slightly wider than [0, 1] so that
// central differences at the endpoints are defined.
inline constexpr double kCgfLambdaMin = -0.5;
inline constexpr double kCgfLambdaMax = 1.5;

// sum_n log Tr[pi_{n+1}^lambda pi_n^{1 - lambda}]
double cgf_exact(const StepSequence& seq, double lambda);
double cgf_exact(std::span<const GibbsState> states, double lambda);

// cov^y_rho(A, B) = Tr[rho^{1-y} (A - <A>) rho^y B]
double cov_y(const GibbsState& rho, const Matrix& a, const Matrix& b, double y);

// int_0^lambda dx int_{x s}^{1 - x s} f(y) dy by nested adaptive quadrature
double cgf_double_integral(const std::function<double(double)>& f, double lambda, double shrink = 1.0);

// -(beta^2 / 2) sum_n (dv_n^i dv_n^j + Phi_n^ij) int_0^lambda dx int_x^{1-x} dy cov^y_{pi_n}(V_i, V_j)
double cgf_linear(const ControlSchedule& schedule, const std::vector<RealVector>& points,
                  const std::vector<RealMatrix>& phi, double lambda);

// Cumulants from a CGF: order 1 -> -K'(0)/beta, order 2 -> K''(0)/beta^2.
double cumulant(const std::function<double(double)>& cgf, int order, double beta);

struct WorkOutcome {
    double w{0.0};
    double p{0.0};
};

// Two-point-measurement work distribution across the quench pi_n -> H_{n+1};
// w = (log p_j - log q_k)/beta with probability p_j |<j|k>|^2, equal w merged.
std::vector<WorkOutcome> tpms_distribution(const GibbsState& before, const GibbsState& after);
std::vector<WorkOutcome> tpms_distribution(const HermitianOperator& h0, const HermitianOperator& h1, double beta);

struct WorkMoments {
    double mean{0.0};
    double variance{0.0};
};
WorkMoments tpms_moments(const GibbsState& before, const GibbsState& after);
WorkMoments tpms_moments(std::span<const WorkOutcome> dist);

// Summed per-step TPMS variances of a chain.
double exact_work_variance(const StepSequence& seq);
double exact_work_variance(std::span<const GibbsState> states);

} // namespace stepeq
