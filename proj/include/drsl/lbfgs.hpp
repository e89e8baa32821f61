#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace drsl {

struct LbfgsConfig {
    std::size_t memory = 10;
    std::size_t max_iters = 1000;
    double rel_tol = 1e-6;  // stop when ∥g∥ <= rel_tol·(1 + |f|)
    double armijo = 1e-4;
    // abort once f exceeds divergence_factor·|f(x0)| for divergence_patience consecutive iterations
    double divergence_factor = 10.0;
    std::size_t divergence_patience = 20;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t rejected_pairs = 0;
};

/// Objective callback: returns f(x) and writes ∇f(x) into g.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& g)>;

/// Limited-memory BFGS with backtracking Armijo line search. Curvature pairs
/// with sᵀy <= 1e-10∥s∥∥y∥ are dropped; with no stored pairs the step is plain
/// gradient descent. Throws SolverError on a non-finite objective or when the
/// divergence guard trips.
LbfgsResult lbfgs_minimize(const Objective& fn, Eigen::VectorXd x0, const LbfgsConfig& config = {});

}  // namespace drsl
