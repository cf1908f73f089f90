#include <doctest.h>

#include "../support/oracles.hpp"
#include "stepeq/errors.hpp"
#include "stepeq/geometry.hpp"
#include "stepeq/qubit.hpp"

#include <cmath>
#include <random>

using namespace stepeq;

namespace {

RealVector vec(std::initializer_list<double> xs)
{
    RealVector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

HermitianOperator half(const Matrix& m) { return HermitianOperator(m / 2.0); }

ControlSchedule qubit_schedule(double delta, double beta, double w0 = -5.0, double w1 = 5.0)
{
    return {{half(pauli::z())}, HermitianOperator(delta * pauli::x() / 2.0), Path::linear(vec({w0}), vec({w1}), 512),
            beta};
}

// beta int_0^1 Tr[V pi^s V pi^{1-s}] ds - beta <V>^2 with pi^s from the dense exponential
double kubo_by_quadrature(const Matrix& h, const Matrix& a, const Matrix& b, double beta)
{
    const Matrix rho = oracle::dense_gibbs(h, beta);
    const Matrix shifted = h - Matrix::Identity(h.rows(), h.cols()) * h.diagonal().real().minCoeff();
    const double z = (-beta * shifted).exp().trace().real();
    auto power = [&](double s) -> Matrix { return (-s * beta * shifted).exp() / std::pow(z, s); };
    const double integral = oracle::simpson(
        [&](double s) { return (a * power(s) * b * power(1.0 - s)).trace().real(); }, 0.0, 1.0, 400);
    return beta * (integral - (rho * a).trace().real() * (rho * b).trace().real());
}

// Closed form for H = (w z + D x)/2 and V = z/2.
double qubit_metric_closed_form(double w, double d, double beta)
{
    const double r = std::hypot(w, d);
    const double m = std::tanh(beta * r / 2.0);
    return beta * w * w * (1.0 - m * m) / (4.0 * r * r) + d * d * m / (2.0 * r * r * r);
}

double min_eigenvalue(const RealMatrix& m)
{
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(m);
    return es.eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("kubo metric simple values")
{
    const ControlSchedule one{{half(pauli::z())}, HermitianOperator::zero(2), Path::linear(vec({0}), vec({1}), 16), 1.0};
    CHECK(kubo_metric(one, vec({0.0}))(0, 0) == doctest::Approx(0.25).epsilon(1e-14));

    const ControlSchedule two{{half(pauli::z()), half(pauli::x())}, HermitianOperator::zero(2),
                              Path::linear(vec({0, 0}), vec({1, 1}), 16), 2.0};
    const RealMatrix g = kubo_metric(two, vec({0.0, 0.0}));
    CHECK((g - 0.5 * RealMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("kubo metric matches s-quadrature and the two-level closed form")
{
    const auto sched = qubit_schedule(1.0, 1.0);
    const Matrix h = pauli::x() / 2.0;
    const double quad = kubo_by_quadrature(h, pauli::z() / 2.0, pauli::z() / 2.0, 1.0);
    CHECK(std::abs(kubo_metric(sched, vec({0.0}))(0, 0) - quad) < 1e-8);
    CHECK(std::abs(quad - qubit_metric_closed_form(0.0, 1.0, 1.0)) < 1e-8);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_real_distribution<double> b(0.1, 5.0);
    for (int i = 0; i < 30; ++i) {
        const double w = u(rng);
        const double beta = b(rng);
        const auto s = qubit_schedule(1.0, beta);
        CHECK(std::abs(kubo_metric(s, vec({w}))(0, 0) - qubit_metric_closed_form(w, 1.0, beta)) < 1e-12);
    }
}

TEST_CASE("kubo metric on random multi-control points agrees with quadrature")
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::vector<HermitianOperator> ops{half(pauli::z()), half(pauli::x()), half(pauli::y())};
    for (int i = 0; i < 10; ++i) {
        const Matrix h = oracle::random_hermitian(rng, 2);
        const double beta = 0.5 + i * 0.3;
        const auto state = gibbs_state(HermitianOperator(h), beta);
        const RealMatrix g = kubo_metric(state, ops);
        for (int a = 0; a < 3; ++a) {
            for (int c = 0; c < 3; ++c) {
                const double q = kubo_by_quadrature(h, ops[a].matrix(), ops[c].matrix(), beta);
                CHECK(std::abs(g(a, c) - q) < 1e-8);
            }
        }
    }
}

TEST_CASE("fluctuation metric")
{
    SUBCASE("equals kubo when the controls commute with H")
    {
        const ControlSchedule s{{half(pauli::z())}, HermitianOperator::zero(2), Path::linear(vec({-2}), vec({2}), 16), 1.3};
        for (double w : {-2.0, -0.3, 0.0, 1.1}) {
            CHECK(std::abs(fluctuation_metric(s, vec({w}))(0, 0) - kubo_metric(s, vec({w}))(0, 0)) < 1e-12);
        }
    }
    SUBCASE("maximal mixing")
    {
        const ControlSchedule s{{half(pauli::z())}, HermitianOperator::zero(2), Path::linear(vec({0}), vec({1}), 16), 1.0};
        CHECK(fluctuation_metric(s, vec({0.0}))(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("strictly above kubo for the tunnelling qubit")
    {
        const auto s = qubit_schedule(1.0, 1.0);
        const double m = fluctuation_metric(s, vec({0.0}))(0, 0);
        const double g = kubo_metric(s, vec({0.0}))(0, 0);
        CHECK(m > g + 1e-3);
        // beta Var(z/2) with <z> = 0 at w = 0
        CHECK(m == doctest::Approx(0.25).epsilon(1e-13));
    }
}

TEST_CASE("metrics are symmetric, PSD and ordered at random points")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.5);
    const std::vector<HermitianOperator> ops{half(pauli::z()), half(pauli::x())};
    const ControlSchedule s{ops, HermitianOperator(0.4 * pauli::y()), Path::linear(vec({0, 0}), vec({1, 1}), 16), 1.7};
    for (int i = 0; i < 100; ++i) {
        const RealVector v = vec({n(rng), n(rng)});
        const RealMatrix g = kubo_metric(s, v);
        const RealMatrix m = fluctuation_metric(s, v);
        CHECK((g - g.transpose()).norm() < 1e-10);
        CHECK((m - m.transpose()).norm() < 1e-10);
        CHECK(min_eigenvalue(g) >= -1e-10);
        CHECK(min_eigenvalue(m) >= -1e-10);
        CHECK(min_eigenvalue(m - g) >= -1e-10);
    }
}

TEST_CASE("metric fields")
{
    const auto s = qubit_schedule(1.0, 1.0);
    const MetricField g = kubo_metric_field(s);
    const MetricField m = fluctuation_metric_field(s);
    const RealVector v = vec({0.7});
    const MetricField mix = mixture_metric_field(g, m, 0.3);
    CHECK(mix(v)(0, 0) == doctest::Approx(0.3 * g(v)(0, 0) + 0.7 * m(v)(0, 0)).epsilon(1e-14));
    CHECK(mixture_metric_field(g, m, 1.0)(v)(0, 0) == g(v)(0, 0));
    CHECK(mixture_metric_field(g, m, 0.0)(v)(0, 0) == m(v)(0, 0));

    MetricField bad{MetricKind::Custom, 1, 1.0, [](const RealVector&) { return RealMatrix::Constant(1, 1, NAN); }};
    CHECK_THROWS_AS(bad(v), DomainError);
}

TEST_CASE("paths keep their endpoints")
{
    const Path p = Path::from_function([](double t) { return vec({std::sin(t), t * t}); }, 64);
    CHECK((p.value(0.0) - vec({0.0, 0.0})).norm() < 1e-10);
    CHECK((p.value(1.0) - vec({std::sin(1.0), 1.0})).norm() < 1e-10);
    CHECK(std::abs(p.value(0.5)(0) - std::sin(0.5)) < 1e-6);
    CHECK(std::abs(p.velocity(0.5)(1) - 1.0) < 1e-3);
    CHECK_THROWS(Path::from_function([](double t) { return vec({t}); }, 3));
}

TEST_CASE("path length")
{
    const MetricField flat = constant_metric_field(RealMatrix::Constant(1, 1, 4.0));
    CHECK(path_length(Path::linear(vec({1.0}), vec({-2.0}), 64), flat) == doctest::Approx(6.0).epsilon(1e-12));

    SUBCASE("reparametrisation invariance")
    {
        const auto s = qubit_schedule(1.0, 1.0);
        const MetricField g = kubo_metric_field(s);
        const double straight = path_length(s.path, g);
        const Path warped = Path::from_function([](double t) { return vec({-5.0 + 10.0 * t * t * (3 - 2 * t)}); }, 4096);
        CHECK(std::abs(path_length(warped, g) - straight) < 1e-6);
    }
    SUBCASE("qubit sweep against a fine Riemann sum of the closed form")
    {
        const auto s = qubit_schedule(1.0, 1.0);
        const double length = path_length(s.path, kubo_metric_field(s));
        const int n = 20480;
        double riemann = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = -5.0 + 10.0 * (i + 0.5) / n;
            riemann += std::sqrt(qubit_metric_closed_form(w, 1.0, 1.0)) * 10.0 / n;
        }
        CHECK(std::abs(length - riemann) < 1e-5);
    }
    CHECK_THROWS(path_length(Path::linear(vec({0}), vec({1}), 8), flat));
}

TEST_CASE("geodesic of a constant metric is the straight ramp")
{
    const MetricField flat = constant_metric_field(RealMatrix::Constant(1, 1, 2.0));
    const Path geo = geodesic(Path::linear(vec({0.0}), vec({1.0}), 64), flat, 256);
    for (double t : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) CHECK(std::abs(geo.value(t)(0) - t) < 1e-12);
}

TEST_CASE("qubit geodesic has constant metric speed and odd symmetry")
{
    const auto s = qubit_schedule(1.0, 1.0);
    const MetricField g = kubo_metric_field(s);
    const Path geo = geodesic(s.path, g);
    const MetricProfile prof(geo, g);
    CHECK(std::abs(prof.length() - path_length(s.path, g)) < 1e-8);
    CHECK(geo.value(0.0)(0) == -5.0);
    CHECK(geo.value(1.0)(0) == 5.0);

    double sum = 0.0;
    double sq = 0.0;
    const int n = 401;
    for (int i = 0; i < n; ++i) {
        const double t = double(i) / (n - 1);
        const double speed = std::sqrt(g(geo.value(t))(0, 0)) * std::abs(geo.velocity(t)(0));
        sum += speed;
        sq += speed * speed;
        CHECK(std::abs(speed / prof.length() - 1.0) < 1e-4);
        CHECK(std::abs(geo.value(t)(0) + geo.value(1.0 - t)(0)) < 1e-8);
    }
    const double mean = sum / n;
    CHECK(std::sqrt(sq / n - mean * mean) / mean < 1e-3);
}

TEST_CASE("geodesic reports where the metric vanishes")
{
    const MetricField holey{MetricKind::Custom, 1, 1.0, [](const RealVector& v) {
                                RealMatrix m(1, 1);
                                m(0, 0) = (v(0) > 0.3 && v(0) < 0.6) ? 0.0 : 1.0;
                                return m;
                            }};
    try {
        geodesic(Path::linear(vec({0.0}), vec({1.0}), 256), holey, 256);
        FAIL("expected a degenerate geodesic");
    } catch (const DegenerateGeodesicError& e) {
        CHECK(e.t_begin >= 0.29);
        CHECK(e.t_end <= 0.61);
        CHECK(e.t_begin < e.t_end);
    }
}

TEST_CASE("equal-length discretisation")
{
    const MetricField flat = constant_metric_field(RealMatrix::Constant(1, 1, 1.0));
    const Path line = Path::linear(vec({0.0}), vec({1.0}), 64);
    const auto pts = discretize_equal_length(line, flat, 4);
    REQUIRE(pts.size() == 5);
    for (int i = 0; i <= 4; ++i) CHECK(std::abs(pts[i](0) - 0.25 * i) < 1e-12);
    const auto ends = discretize_equal_length(line, flat, 1);
    REQUIRE(ends.size() == 2);
    CHECK(ends[0](0) == 0.0);
    CHECK(ends[1](0) == 1.0);

    // qubit: each step carries L/N of length, measured by an independent quadrature
    const auto s = qubit_schedule(1.0, 1.0);
    const MetricField g = kubo_metric_field(s);
    const double length = path_length(s.path, g);
    for (std::size_t n : {3u, 17u, 100u}) {
        const auto v = discretize_equal_length(s.path, g, n);
        CHECK(v.front()(0) == -5.0);
        CHECK(v.back()(0) == 5.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double piece = oracle::simpson(
                [](double w) { return std::sqrt(qubit_metric_closed_form(w, 1.0, 1.0)); }, v[i](0), v[i + 1](0), 400);
            CHECK(std::abs(piece * n / length - 1.0) < 1e-3);
        }
    }
    const auto uniform = discretize_uniform(s.path, 4);
    CHECK(uniform[2](0) == doctest::Approx(0.0));
}
