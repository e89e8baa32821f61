#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drsl/bn.hpp"
#include "drsl/encoding.hpp"

namespace drsl {

/// Regression parameter for one target: stacked ρ_r̄ x ρ_r matrix with one
/// row-block per non-target node.
struct WeightMatrix {
    EncodedView view;
    Eigen::MatrixXd W;

    static WeightMatrix zeros(const EncodedView& view);

    auto block(std::size_t node) {
        return W.middleRows(static_cast<Eigen::Index>(view.feature_offset(node)),
                            static_cast<Eigen::Index>(view.width(node)));
    }
    auto block(std::size_t node) const {
        return W.middleRows(static_cast<Eigen::Index>(view.feature_offset(node)),
                            static_cast<Eigen::Index>(view.width(node)));
    }
    double block_norm(std::size_t node) const { return block(node).norm(); }

    /// Σ_i ∥W_i∥_F.
    double group_norm() const;
};

/// ½∥ℰ(x_r) - Wᵀℰ(x_r̄)∥² for a full row.
double squared_loss(const WeightMatrix& W, std::span<const int> row, Encoding scheme);

double empirical_risk(const WeightMatrix& W, const EncodedProblem& problem);
double empirical_risk(const WeightMatrix& W, const Dataset& data, Encoding scheme);

/// ∇ empirical risk = (XᵀX W - XᵀY) / m.
Eigen::MatrixXd risk_gradient(const WeightMatrix& W, const EncodedProblem& problem);

/// H̃ = (1/m) Σ ℰ(x_r̄)ℰ(x_r̄)ᵀ.
Eigen::MatrixXd cross_moment(const Dataset& data, std::size_t target, Encoding scheme);

/// Weighted set of joint states: the empirical distribution of a dataset or the
/// exact joint distribution of a small network.
struct StateDistribution {
    std::vector<int> cardinalities;
    std::vector<std::string> names;
    std::vector<int> states;  // row-major, one state per row
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<const int> state(std::size_t k) const {
        return {states.data() + k * cardinalities.size(), cardinalities.size()};
    }
};

StateDistribution empirical_distribution(const Dataset& data);

/// Enumerates every joint state with positive probability. Throws UsageError
/// above 10^6 states.
StateDistribution exact_distribution(const DiscreteBayesNet& net);

/// First and second moments of the encoded variables for one target.
struct Moments {
    EncodedView view;
    Encoding scheme = Encoding::Dummy;
    Eigen::MatrixXd H;  // E[ℰ(X_r̄)ℰ(X_r̄)ᵀ]
    Eigen::MatrixXd C;  // E[ℰ(X_r̄)ℰ(X_r)ᵀ]
    double Syy = 0.0;   // E∥ℰ(X_r)∥²
};

Moments compute_moments(const StateDistribution& dist, std::size_t target, Encoding scheme);

/// Risk from moments: ½(tr(WᵀHW) - 2tr(WᵀC) + Syy).
double moment_risk(const WeightMatrix& W, const Moments& mom);

/// Least-squares solution restricted to the blocks in `support`; other blocks
/// are exactly zero. Throws SolverError when λ_min(H_SS) <= 1e-10.
WeightMatrix solve_surrogate(const Moments& mom, std::span<const std::size_t> support);

/// Point estimates of the regularity quantities for one target.
struct DiagnosticsReport {
    std::string node;
    std::vector<std::string> support;
    double lambda_min = 0.0;   // +inf when the support is empty
    double incoherence = 0.0;  // +inf when H_SS is singular
    double alpha = 1.0;
    double beta_min = 0.0;  // +inf when the support is empty
    double sigma_hat = 0.0;
    double mu_hat = 0.0;
    bool singular = false;

    bool operator==(const DiagnosticsReport&) const = default;
};

DiagnosticsReport diagnostics(const StateDistribution& dist, std::size_t target, const WeightMatrix& W,
                              std::span<const std::size_t> support, Encoding scheme);

/// Reports keyed by node name; non-finite values are written as null. A
/// "_meta" key, if present, is skipped when reading.
std::string diagnostics_to_json(const std::vector<DiagnosticsReport>& reports);
std::vector<DiagnosticsReport> diagnostics_from_json(const std::string& text);

}  // namespace drsl
