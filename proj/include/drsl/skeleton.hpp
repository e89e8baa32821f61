#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "drsl/erm.hpp"
#include "drsl/kl.hpp"
#include "drsl/wasserstein.hpp"

namespace drsl {

enum class EstimatorKind { Wass, Kl, Reg };

EstimatorKind parse_estimator(const std::string& name);
std::string to_string(EstimatorKind kind);

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Reg;
    Encoding scheme = Encoding::Dummy;
    double lambda = 0.0;    // reg
    double epsilon0 = 0.0;  // wass, kl
    ErmConfig erm;
    AdamConfig adam;
    LbfgsConfig lbfgs;
    std::uint64_t seed = 0;
};

enum class Aggregation { Union, And };

/// Undirected edge set plus the block norms that produced it.
struct Skeleton {
    std::vector<std::string> names;
    std::set<std::pair<std::size_t, std::size_t>> edges;  // u < v
    std::map<std::pair<std::size_t, std::size_t>, double> scores;  // (r, i) -> ∥Ŵ_i∥_F from r's fit

    std::size_t size() const { return names.size(); }
    bool operator==(const Skeleton&) const = default;
};

struct NodeFit {
    WeightMatrix W;
    std::vector<double> scores;  // per node; 0 for the target
};

/// Fits one node regression with the configured estimator. The random stream
/// depends on the node's name, not its position.
NodeFit fit_node(const Dataset& data, std::size_t target, const EstimatorConfig& config);

/// {i : ∥Ŵ_i∥_F > τ}.
std::set<std::size_t> learn_neighbors(const Dataset& data, std::size_t target, const EstimatorConfig& config,
                                      double threshold);

/// Fits every node (concurrently when threads > 1) and thresholds the scores.
/// Errors are rethrown with the failing node's name.
Skeleton learn_skeleton(const Dataset& data, const EstimatorConfig& config, double threshold,
                        Aggregation agg = Aggregation::Union, unsigned threads = 1,
                        std::vector<NodeFit>* fits = nullptr);

/// Edge set from already computed scores.
Skeleton threshold_scores(std::vector<std::string> names,
                          const std::map<std::pair<std::size_t, std::size_t>, double>& scores, double threshold,
                          Aggregation agg = Aggregation::Union);

std::string skeleton_to_json(const Skeleton& skel);

/// Node names come from the file's "nodes" field when present, otherwise from
/// `names`. Unknown names raise DataError.
Skeleton parse_skeleton(const std::string& text, const std::vector<std::string>& names = {});

}  // namespace drsl
