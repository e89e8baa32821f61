#pragma once

#include <cstddef>
#include <vector>

#include "drsl/lossmoments.hpp"

namespace drsl {

enum class StepRule { Fixed, Backtracking };

struct ErmConfig {
    double lambda = 0.0;
    std::size_t max_iters = 5000;
    StepRule step = StepRule::Backtracking;
    bool accelerate = true;
    double tol = 1e-6;
    bool record_history = false;

    /// Throws UsageError on lambda < 0 or tol <= 0.
    void validate() const;
};

struct ErmResult {
    WeightMatrix W;
    std::size_t iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double residual = 0.0;
    std::vector<double> history;  // objective per iteration when requested
};

/// Empirical risk plus λ Σ_i ∥W_i∥_F.
double erm_objective(const WeightMatrix& W, const Dataset& data, double lambda, Encoding scheme);
double erm_objective(const WeightMatrix& W, const Moments& mom, double lambda);

/// Block soft-threshold: W_i ← max(0, 1 - t/∥W_i∥_F) W_i.
WeightMatrix prox_block_l21(const WeightMatrix& W, double t);

/// Proximal gradient on the moment form of the risk, starting at `init`
/// (zeros when empty). Throws SolverError when the objective stops being finite.
ErmResult erm_fit(const Moments& mom, const ErmConfig& config, const WeightMatrix* init = nullptr);
ErmResult erm_fit(const Dataset& data, std::size_t target, const ErmConfig& config, Encoding scheme);

}  // namespace drsl
