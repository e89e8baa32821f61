#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drsl/rng.hpp"

namespace drsl {

struct Node {
    std::string name;
    int cardinality = 2;

    bool operator==(const Node&) const = default;
};

/// m x n table of category indices. Rows are stored contiguously.
class Dataset {
public:
    Dataset() = default;

    /// Throws DataError when a value is out of range, n < 1, m < 1 or a
    /// cardinality is below 2. Learning routines additionally require n >= 2.
    Dataset(std::vector<std::string> names, std::vector<int> cardinalities, std::vector<int> values);

    std::size_t rows() const { return cardinalities_.empty() ? 0 : values_.size() / cardinalities_.size(); }
    std::size_t cols() const { return cardinalities_.size(); }

    int operator()(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
    std::span<const int> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }

    const std::vector<int>& cardinalities() const { return cardinalities_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<int>& values() const { return values_; }

    /// Rows in the given order (indices may repeat).
    Dataset select_rows(std::span<const std::size_t> indices) const;

    /// Columns reordered so that column k of the result is column order[k] of this.
    Dataset permute_columns(std::span<const std::size_t> order) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<int> cardinalities_;
    std::vector<int> values_;
};

/// Directed graph over n nodes, kept acyclic by its mutators' callers.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::size_t n) : n_(n) {}
    Dag(std::size_t n, std::set<std::pair<std::size_t, std::size_t>> edges);

    std::size_t size() const { return n_; }
    const std::set<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    bool has_edge(std::size_t u, std::size_t v) const { return edges_.count({u, v}) > 0; }
    void add_edge(std::size_t u, std::size_t v) { edges_.insert({u, v}); }
    void remove_edge(std::size_t u, std::size_t v) { edges_.erase({u, v}); }

    /// Parents of v in increasing index order.
    std::vector<std::size_t> parents(std::size_t v) const;

    /// True when a directed path from `from` to `to` exists.
    bool reachable(std::size_t from, std::size_t to) const;

    bool is_acyclic() const;

    /// Unordered skeleton pairs (u < v).
    std::set<std::pair<std::size_t, std::size_t>> skeleton() const;

    bool operator==(const Dag&) const = default;

private:
    std::size_t n_ = 0;
    std::set<std::pair<std::size_t, std::size_t>> edges_;
};

/// Categorical Bayesian network with one CPT per node.
///
/// CPT rows are indexed by parent configuration, enumerated lexicographically
/// over parent category indices with the first-listed parent most significant.
class DiscreteBayesNet {
public:
    DiscreteBayesNet() = default;

    /// Validates every invariant and throws DataError naming the offending
    /// node: acyclic parents, CPT row count equals the product of parent
    /// cardinalities, rows non-negative and summing to 1 within 1e-9.
    DiscreteBayesNet(std::vector<Node> nodes, std::vector<std::vector<std::size_t>> parents,
                     std::vector<std::vector<std::vector<double>>> cpts);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t v) const { return nodes_[v]; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::size_t>& parents(std::size_t v) const { return parents_[v]; }
    const std::vector<std::vector<double>>& cpt(std::size_t v) const { return cpts_[v]; }
    const std::vector<std::size_t>& topological_order() const { return order_; }

    std::vector<int> cardinalities() const;
    std::vector<std::string> names() const;
    std::optional<std::size_t> index_of(const std::string& name) const;

    /// Row index into cpt(v) for a full joint state.
    std::size_t parent_config(std::size_t v, std::span<const int> state) const;

    /// Probability of a full joint state.
    double joint_probability(std::span<const int> state) const;

    /// Directed edges (parent, child).
    Dag dag() const;

    bool operator==(const DiscreteBayesNet&) const = default;

private:
    std::vector<Node> nodes_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::vector<double>>> cpts_;
    std::vector<std::size_t> order_;
};

/// Ancestral sampling in topological order; deterministic per seed.
Dataset sample(const DiscreteBayesNet& net, std::size_t m, std::uint64_t seed);

/// Draws one joint state using an existing stream.
std::vector<int> sample_state(const DiscreteBayesNet& net, Rng& rng);

/// Random DAG over a random topological order; each node takes a uniform
/// number (0..max_parents) of parents drawn uniformly from its predecessors,
/// and each CPT row is a Dirichlet(1) draw.
DiscreteBayesNet random_network(std::size_t n, std::size_t max_parents, const std::vector<int>& cardinalities,
                                std::uint64_t seed);

/// Maximum number of parent configurations a family may have before the
/// score functions refuse to count it.
inline constexpr double kMaxParentConfigs = 1e7;

/// BIC contribution of one family: log-likelihood at the MLE minus
/// (ln m / 2) * (|C_v| - 1) * prod |C_p|.
double family_bic(const Dataset& data, std::size_t v, std::span<const std::size_t> parents);

/// Sum of family_bic over nodes. Higher is better.
double bic_score(const Dag& dag, const Dataset& data);

// I/O. Network JSON: {"nodes":[{"name","cardinality"}],"parents":{...},"cpts":{...}}.
DiscreteBayesNet parse_network(const std::string& text);
std::string network_to_json(const DiscreteBayesNet& net);
DiscreteBayesNet load_network(const std::string& path);
void save_network(const DiscreteBayesNet& net, const std::string& path);

/// Dataset CSV: header of node names then one comma-separated row of category
/// indices per sample. Lines starting with '#' are comments. Cardinalities are
/// taken from `cardinalities` when given, otherwise inferred as max(2, max+1).
Dataset parse_dataset(const std::string& text, const std::optional<std::vector<int>>& cardinalities = std::nullopt);
std::string dataset_to_csv(const Dataset& data, const std::string& comment = {});
Dataset load_dataset(const std::string& path, const std::optional<std::vector<int>>& cardinalities = std::nullopt);
void save_dataset(const Dataset& data, const std::string& path, const std::string& comment = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace drsl
