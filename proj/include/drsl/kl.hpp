#pragma once

#include <cstddef>

#include "drsl/lbfgs.hpp"
#include "drsl/lossmoments.hpp"

namespace drsl {

inline constexpr double kGammaFloor = 1e-8;

struct KlDualState {
    WeightMatrix W;
    double gamma = 1.0;
    double epsilon = 0.0;
};

/// γ·ln((1/m) Σ e^{ℓ_i/γ}) + γε, stabilized by log-sum-exp.
double kl_dual_objective(const KlDualState& state, const EncodedProblem& problem);
double kl_dual_objective(const KlDualState& state, const Dataset& data, Encoding scheme);

struct KlGradient {
    Eigen::MatrixXd dW;
    double dgamma = 0.0;
};

KlGradient kl_gradient(const KlDualState& state, const EncodedProblem& problem);
KlGradient kl_gradient(const KlDualState& state, const Dataset& data, Encoding scheme);

/// Softmax weights p_i ∝ e^{ℓ_i/γ}: the worst-case reweighting of the samples.
Eigen::VectorXd kl_weights(const KlDualState& state, const EncodedProblem& problem);

struct KlResult {
    WeightMatrix W;
    double gamma = 0.0;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Joint minimization over (W, γ) with γ = floor + softplus(θ), ε = epsilon0 / m.
KlResult kl_fit(const Dataset& data, std::size_t target, double epsilon0, Encoding scheme,
                const LbfgsConfig& config = {}, double gamma0 = 1.0);

}  // namespace drsl
