#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "drsl/bn.hpp"

namespace drsl {

using EdgeSet = std::set<std::pair<std::size_t, std::size_t>>;

/// Normalizes pairs to (min, max).
EdgeSet undirected(const EdgeSet& edges);

/// 2TP / (2TP + FP + FN) over unordered pairs; 1.0 when both sets are empty.
double f1_skeleton(const EdgeSet& estimate, const EdgeSet& truth, std::size_t n);

/// Test log-likelihood under add-α CPTs fit on `train`, minus (ln m_test / 2)
/// times the free parameter count.
double bic_heldout(const Dag& dag, const Dataset& train, const Dataset& test, double alpha = 1.0);

/// One line of the metrics CSV.
struct MetricsRow {
    std::string dataset;
    std::size_t n = 0;
    std::size_t m = 0;
    std::string noise = "none";
    double zeta = 0.0;
    std::string estimator;
    std::optional<double> f1;  // empty when there is no ground truth
    std::optional<double> bic;
    std::optional<double> runtime_ms;
    std::string seed;  // integer seed, or "mean" / "std" for aggregate rows
};

inline constexpr const char* kMetricsHeader = "dataset,n,m,noise,zeta,estimator,f1,bic,runtime_ms,seed";

std::string format_metrics_row(const MetricsRow& row);

}  // namespace drsl
