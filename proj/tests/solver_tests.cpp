#include "anthrofit/rng.hpp"
#include "anthrofit/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace anthrofit;

namespace {

bool non_increasing(const std::vector<double>& trace) {
    for (size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1]) return false;
    return true;
}

double shifted_bowl(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    grad.resize(2);
    grad[0] = 2.0 * (x[0] - 3.0);
    grad[1] = 2.0 * (x[1] + 1.0);
    return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 1.0) * (x[1] + 1.0);
}

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const double a = x[0];
    const double b = x[1];
    grad.resize(2);
    grad[0] = -400.0 * a * (b - a * a) - 2.0 * (1.0 - a);
    grad[1] = 200.0 * (b - a * a);
    return 100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a);
}

}  // namespace

TEST_CASE("quadratic bowl converges fast") {
    SolveReport report = minimize(shifted_bowl, Eigen::Vector2d(0, 0));
    CHECK(report.ok);
    CHECK(report.gradient_norm < 1e-8);
    CHECK(report.iterations <= 20);
    CHECK(std::abs(report.x[0] - 3.0) < 1e-7);
    CHECK(std::abs(report.x[1] + 1.0) < 1e-7);
    CHECK(non_increasing(report.energy_trace));
}

TEST_CASE("rosenbrock reaches the global minimum") {
    SolveConfig config;
    config.max_iterations = 200;
    SolveReport report = minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0), config);
    CHECK(report.ok);
    CHECK(std::abs(report.x[0] - 1.0) < 1e-5);
    CHECK(std::abs(report.x[1] - 1.0) < 1e-5);
    CHECK(non_increasing(report.energy_trace));
}

TEST_CASE("random spd quadratic meets the gradient tolerance inside the cap") {
    Rng rng(51);
    const int n = 10;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    Eigen::MatrixXd hessian = m.transpose() * m + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd center(n);
    for (int i = 0; i < n; ++i) center[i] = rng.uniform(-5, 5);

    // Centered form: the minimum value is 0, so energy decreases stay
    // representable all the way down to the gradient tolerance.
    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        Eigen::VectorXd y = x - center;
        grad = hessian * y;
        return 0.5 * y.dot(hessian * y);
    };
    SolveConfig config;
    config.relative_energy_tolerance = 1e-300;  // run down to the gradient test
    SolveReport report = minimize(objective, Eigen::VectorXd::Zero(n), config);
    CHECK(report.ok);
    CHECK(report.reason == StopReason::gradient);
    CHECK(report.gradient_norm < 1e-8);
    CHECK(report.iterations < 100);
    CHECK(non_increasing(report.energy_trace));
    CHECK((report.x - center).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("finite difference oracle") {
    auto square = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
    Eigen::VectorXd at(1);
    at << 2.0;
    Eigen::VectorXd grad = finite_difference_gradient(square, at, 1e-5);
    CHECK(std::abs(grad[0] - 4.0) < 1e-8);

    auto constant = [](const Eigen::VectorXd&) { return 7.5; };
    Eigen::VectorXd zero = finite_difference_gradient(constant, Eigen::VectorXd::Zero(4), 1e-5);
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("translation invariance") {
    Eigen::Vector2d c(5.0, -2.0);
    SolveReport base = minimize(shifted_bowl, Eigen::Vector2d(0, 0));
    auto shifted = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        double e = shifted_bowl(x - c, grad);
        return e;
    };
    SolveReport moved = minimize(shifted, Eigen::Vector2d(0, 0) + c);
    CHECK(moved.iterations == base.iterations);
    CHECK((moved.x - (base.x + c)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("determinism") {
    SolveReport a = minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0));
    SolveReport b = minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0));
    CHECK(a.iterations == b.iterations);
    CHECK(a.energy == b.energy);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.energy_trace.size() == b.energy_trace.size());
    for (size_t i = 0; i < a.energy_trace.size(); ++i)
        CHECK(a.energy_trace[i] == b.energy_trace[i]);
}

TEST_CASE("non-finite objective stops with the last good iterate") {
    // Finite only at the starting point, so every trial step fails.
    auto cliff = [](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        grad.resize(1);
        if (x[0] != 1.0) {
            grad[0] = std::nan("");
            return std::nan("");
        }
        grad[0] = 5.0;
        return 2.0;
    };
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    SolveReport report = minimize(cliff, x0);
    CHECK(!report.ok);
    CHECK(report.reason == StopReason::non_finite);
    CHECK(report.energy == 2.0);
    CHECK(report.x[0] == 1.0);
}
