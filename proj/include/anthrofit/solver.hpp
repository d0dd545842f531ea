#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anthrofit {

// Evaluates the energy at x and fills grad (resized by the callee).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct SolveConfig {
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;
    double relative_energy_tolerance = 1e8 * std::numeric_limits<double>::epsilon();
    int history_size = 10;
};

enum class StopReason { gradient, relative_energy, iteration_cap, non_finite };

std::string to_string(StopReason reason);

struct SolveReport {
    Eigen::VectorXd x;
    double energy = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    StopReason reason = StopReason::iteration_cap;
    std::vector<double> energy_trace;  // energy at x0 and after each accepted step
    bool ok = true;                    // false when a non-finite value stopped the solve
};

// Limited-memory BFGS with a strong Wolfe line search (c1 = 1e-4, c2 = 0.9).
// Stops when the gradient norm falls under gradient_tolerance, the relative
// energy change falls under relative_energy_tolerance, or max_iterations
// accepted steps have run.
SolveReport minimize(const Objective& objective, const Eigen::VectorXd& x0,
                     const SolveConfig& config = {});

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double h);

}  // namespace anthrofit
