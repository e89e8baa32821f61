#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "drsl/lossmoments.hpp"
#include "drsl/rng.hpp"

namespace drsl {

/// Adversarial state for one sample and its value ℓ_W(x̂) - γ∥ℰ(x̂) - ℰ(x^(i))∥₁.
struct WorstCase {
    std::vector<int> state;
    double value = 0.0;
    double transport = 0.0;
    std::size_t evaluations = 0;  // coordinate-value trials (greedy only)
};

/// Per-sample inner supremum for fixed (W, γ). Precomputes each node's
/// contribution W_jᵀℰ(v) so that changing one coordinate costs O(ρ_r).
class InnerSupremum {
public:
    InnerSupremum(const WeightMatrix& W, double gamma, Encoding scheme);

    /// Objective at x relative to the sample xi, evaluated from scratch.
    double objective(std::span<const int> x, std::span<const int> xi) const;

    /// ∥ℰ(x) - ℰ(xi)∥₁.
    double transport(std::span<const int> x, std::span<const int> xi) const;

    /// Exhaustive search. The sample itself wins ties, then the
    /// lexicographically smallest state. Throws UsageError above 10^6 states.
    WorstCase exact(std::span<const int> xi) const;

    /// Greedy coordinate search from (node, value) starts. All Σ|C_j| starts
    /// are used when `starts` is at least that many; otherwise a uniform subset.
    WorstCase greedy(std::span<const int> xi, std::size_t starts, Rng& rng) const;

    std::size_t full_starts() const { return full_starts_; }
    double gamma() const { return gamma_; }

private:
    EncodedView view_;
    Encoding scheme_;
    double gamma_;
    std::size_t n_, q_, full_starts_ = 0;
    // contrib_[j][v*q .. v*q+q): prediction term of node j at value v, or ℰ(v) for the target
    std::vector<std::vector<double>> contrib_;
    std::vector<std::vector<int>> dist_;  // dist_[j][a*c+b]
};

enum class InnerMethod { Exact, Greedy };

struct WassDualState {
    WeightMatrix W;
    double gamma = 1.0;
    double epsilon = 0.0;
};

/// Worst-case assignment for every row of `data`. Greedy starts use streams
/// derived from (seed, row index, iteration).
std::vector<WorstCase> worst_cases(const WassDualState& state, const Dataset& data, Encoding scheme, InnerMethod method,
                                   std::size_t starts = 0, std::uint64_t seed = 0, std::uint64_t iteration = 0);

/// γε + (1/m) Σ_i value_i.
double wass_dual_objective(const WassDualState& state, const Dataset& data, Encoding scheme, InnerMethod method,
                           std::size_t starts = 0, std::uint64_t seed = 0, std::uint64_t iteration = 0);

/// Dual value with the adversarial states frozen.
double wass_frozen_objective(const WassDualState& state, const Dataset& data, const std::vector<WorstCase>& wc,
                             Encoding scheme);

struct WassGradient {
    Eigen::MatrixXd dW;
    double dgamma = 0.0;
};

WassGradient wass_subgradient(const WassDualState& state, const Dataset& data, const std::vector<WorstCase>& wc,
                              Encoding scheme);

/// ρ_[n]·∥Ẅ∥_F², where Ẅ stacks W with -I in the target block.
double identity_gamma_bound(const WeightMatrix& W);

/// Empirical risk + ε·ρ_[n]·∥Ẅ∥_F².
double prop1_equivalent_objective(const WeightMatrix& W, double epsilon, const Dataset& data, Encoding scheme);

struct AdamConfig {
    double lr = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.990;
    double eps = 1e-8;
    std::size_t batch = 500;
    std::size_t iters = 200;
    std::size_t inner_starts = 10;
    double gamma0 = 1.0;
    InnerMethod inner = InnerMethod::Greedy;

    void validate() const;
};

struct WassResult {
    WeightMatrix W;
    double gamma = 0.0;
    double objective = 0.0;  // best full-data dual value
    std::size_t best_iteration = 0;
    std::vector<double> history;
};

/// Stochastic minimization of the dual over (W, γ) with ε = epsilon0 / m.
WassResult wass_fit(const Dataset& data, std::size_t target, double epsilon0, const AdamConfig& opt, Encoding scheme,
                    std::uint64_t seed);

}  // namespace drsl
