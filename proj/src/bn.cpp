#include "drsl/bn.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <map>
#include <numeric>
#include <unordered_map>

#include "drsl/error.hpp"

namespace drsl {

Dataset::Dataset(std::vector<std::string> names, std::vector<int> cardinalities, std::vector<int> values)
    : names_(std::move(names)), cardinalities_(std::move(cardinalities)), values_(std::move(values)) {
    const std::size_t n = cardinalities_.size();
    if (n < 1) throw DataError("dataset must have at least one column");
    if (names_.empty()) {
        for (std::size_t j = 0; j < n; ++j) names_.push_back(fmt::format("X{}", j));
    }
    if (names_.size() != n) throw DataError("dataset: name count does not match cardinality count");
    for (std::size_t j = 0; j < n; ++j) {
        if (cardinalities_[j] < 2) throw DataError(fmt::format("dataset: column '{}' has cardinality < 2", names_[j]));
    }
    if (values_.size() % n != 0) throw DataError("dataset: ragged value table");
    if (values_.empty()) throw DataError("dataset must have at least one row");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const std::size_t j = k % n;
        if (values_[k] < 0 || values_[k] >= cardinalities_[j]) {
            throw DataError(fmt::format("dataset: row {} column '{}' value {} outside [0, {})", k / n, names_[j],
                                        values_[k], cardinalities_[j]));
        }
    }
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
    std::vector<int> out;
    out.reserve(indices.size() * cols());
    for (auto i : indices) {
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return Dataset(names_, cardinalities_, std::move(out));
}

Dataset Dataset::permute_columns(std::span<const std::size_t> order) const {
    std::vector<std::string> names;
    std::vector<int> cards;
    for (auto j : order) {
        names.push_back(names_[j]);
        cards.push_back(cardinalities_[j]);
    }
    std::vector<int> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < rows(); ++i)
        for (auto j : order) out.push_back((*this)(i, j));
    return Dataset(std::move(names), std::move(cards), std::move(out));
}

Dag::Dag(std::size_t n, std::set<std::pair<std::size_t, std::size_t>> edges) : n_(n), edges_(std::move(edges)) {
    for (auto [u, v] : edges_) {
        if (u >= n_ || v >= n_) throw DataError("dag: edge endpoint out of range");
        if (u == v) throw DataError("dag: self-loop");
    }
    if (!is_acyclic()) throw DataError("dag: graph has a cycle");
}

std::vector<std::size_t> Dag::parents(std::size_t v) const {
    std::vector<std::size_t> out;
    for (auto [u, w] : edges_)
        if (w == v) out.push_back(u);
    return out;
}

bool Dag::reachable(std::size_t from, std::size_t to) const {
    std::vector<std::vector<std::size_t>> children(n_);
    for (auto [u, v] : edges_) children[u].push_back(v);
    std::vector<char> seen(n_, 0);
    std::vector<std::size_t> stack{from};
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        if (u == to) return true;
        if (seen[u]) continue;
        seen[u] = 1;
        for (auto c : children[u])
            if (!seen[c]) stack.push_back(c);
    }
    return false;
}

bool Dag::is_acyclic() const {
    std::vector<int> indeg(n_, 0);
    std::vector<std::vector<std::size_t>> children(n_);
    for (auto [u, v] : edges_) {
        children[u].push_back(v);
        ++indeg[v];
    }
    std::vector<std::size_t> queue;
    for (std::size_t v = 0; v < n_; ++v)
        if (indeg[v] == 0) queue.push_back(v);
    std::size_t seen = 0;
    while (!queue.empty()) {
        auto u = queue.back();
        queue.pop_back();
        ++seen;
        for (auto c : children[u])
            if (--indeg[c] == 0) queue.push_back(c);
    }
    return seen == n_;
}

std::set<std::pair<std::size_t, std::size_t>> Dag::skeleton() const {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (auto [u, v] : edges_) out.insert({std::min(u, v), std::max(u, v)});
    return out;
}

DiscreteBayesNet::DiscreteBayesNet(std::vector<Node> nodes, std::vector<std::vector<std::size_t>> parents,
                                   std::vector<std::vector<std::vector<double>>> cpts)
    : nodes_(std::move(nodes)), parents_(std::move(parents)), cpts_(std::move(cpts)) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw DataError("network has no nodes");
    if (parents_.size() != n || cpts_.size() != n) throw DataError("network: parents/cpts size mismatch");
    for (std::size_t v = 0; v < n; ++v) {
        const auto& name = nodes_[v].name;
        if (nodes_[v].cardinality < 2) throw DataError(fmt::format("node '{}': cardinality must be >= 2", name));
        for (std::size_t w = 0; w < v; ++w)
            if (nodes_[w].name == name) throw DataError(fmt::format("node '{}': duplicate name", name));
        double configs = 1.0;
        std::set<std::size_t> uniq;
        for (auto p : parents_[v]) {
            if (p >= n) throw DataError(fmt::format("node '{}': parent index out of range", name));
            if (p == v) throw DataError(fmt::format("node '{}': self-parent", name));
            if (!uniq.insert(p).second) throw DataError(fmt::format("node '{}': duplicate parent", name));
            configs *= nodes_[p].cardinality;
        }
        if (configs > kMaxParentConfigs)
            throw DataError(fmt::format("node '{}': too many parent configurations", name));
        if (cpts_[v].size() != static_cast<std::size_t>(configs)) {
            throw DataError(fmt::format("node '{}': CPT has {} rows, expected {}", name, cpts_[v].size(),
                                        static_cast<std::size_t>(configs)));
        }
        for (std::size_t c = 0; c < cpts_[v].size(); ++c) {
            const auto& row = cpts_[v][c];
            if (row.size() != static_cast<std::size_t>(nodes_[v].cardinality))
                throw DataError(fmt::format("node '{}': CPT row {} has wrong length", name, c));
            double sum = 0.0;
            for (double p : row) {
                if (!(p >= 0.0) || !std::isfinite(p))
                    throw DataError(fmt::format("node '{}': CPT row {} has a negative or non-finite entry", name, c));
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw DataError(fmt::format("node '{}': CPT row {} sums to {}", name, c, sum));
        }
    }
    Dag g(n);
    for (std::size_t v = 0; v < n; ++v)
        for (auto p : parents_[v]) g.add_edge(p, v);
    if (!g.is_acyclic()) throw DataError("network: parent graph has a cycle");

    // Kahn's algorithm, smallest index first, for a deterministic order.
    std::vector<int> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v) indeg[v] = static_cast<int>(parents_[v].size());
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.insert(v);
    while (!ready.empty()) {
        auto u = *ready.begin();
        ready.erase(ready.begin());
        order_.push_back(u);
        for (std::size_t v = 0; v < n; ++v)
            for (auto p : parents_[v])
                if (p == u && --indeg[v] == 0) ready.insert(v);
    }
}

std::vector<int> DiscreteBayesNet::cardinalities() const {
    std::vector<int> out;
    for (const auto& nd : nodes_) out.push_back(nd.cardinality);
    return out;
}

std::vector<std::string> DiscreteBayesNet::names() const {
    std::vector<std::string> out;
    for (const auto& nd : nodes_) out.push_back(nd.name);
    return out;
}

std::optional<std::size_t> DiscreteBayesNet::index_of(const std::string& name) const {
    for (std::size_t v = 0; v < nodes_.size(); ++v)
        if (nodes_[v].name == name) return v;
    return std::nullopt;
}

std::size_t DiscreteBayesNet::parent_config(std::size_t v, std::span<const int> state) const {
    std::size_t idx = 0;
    for (auto p : parents_[v]) idx = idx * nodes_[p].cardinality + state[p];
    return idx;
}

double DiscreteBayesNet::joint_probability(std::span<const int> state) const {
    double p = 1.0;
    for (std::size_t v = 0; v < nodes_.size(); ++v) p *= cpts_[v][parent_config(v, state)][state[v]];
    return p;
}

Dag DiscreteBayesNet::dag() const {
    Dag g(size());
    for (std::size_t v = 0; v < size(); ++v)
        for (auto p : parents_[v]) g.add_edge(p, v);
    return g;
}

std::vector<int> sample_state(const DiscreteBayesNet& net, Rng& rng) {
    std::vector<int> state(net.size(), 0);
    for (auto v : net.topological_order()) {
        const auto& row = net.cpt(v)[net.parent_config(v, state)];
        state[v] = static_cast<int>(rng.categorical(row.data(), row.size()));
    }
    return state;
}

Dataset sample(const DiscreteBayesNet& net, std::size_t m, std::uint64_t seed) {
    Rng rng(derive_seed({seed, 0x5a3d1eULL}));
    std::vector<int> values;
    values.reserve(m * net.size());
    for (std::size_t i = 0; i < m; ++i) {
        auto s = sample_state(net, rng);
        values.insert(values.end(), s.begin(), s.end());
    }
    return Dataset(net.names(), net.cardinalities(), std::move(values));
}

DiscreteBayesNet random_network(std::size_t n, std::size_t max_parents, const std::vector<int>& cardinalities,
                                std::uint64_t seed) {
    if (n < 1) throw UsageError("random_network: n must be >= 1");
    if (cardinalities.size() != n) throw UsageError("random_network: need one cardinality per node");
    if (n > 1 && max_parents >= n) throw UsageError("random_network: max_parents must be < n");
    Rng rng(derive_seed({seed, 0x7a9d0cULL}));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<Node> nodes;
    for (std::size_t v = 0; v < n; ++v) nodes.push_back({fmt::format("X{}", v), cardinalities[v]});
    std::vector<std::vector<std::size_t>> parents(n);
    std::vector<std::vector<std::vector<double>>> cpts(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const auto v = order[pos];
        const std::size_t k = rng.index(std::min(max_parents, pos) + 1);
        for (auto p : rng.sample_without_replacement(pos, k)) parents[v].push_back(order[p]);
        std::sort(parents[v].begin(), parents[v].end());
        std::size_t configs = 1;
        for (auto p : parents[v]) configs *= static_cast<std::size_t>(cardinalities[p]);
        for (std::size_t c = 0; c < configs; ++c) {
            std::vector<double> row(cardinalities[v]);
            double sum = 0.0;
            for (auto& x : row) sum += (x = rng.exponential());
            for (auto& x : row) x /= sum;
            cpts[v].push_back(std::move(row));
        }
    }
    return DiscreteBayesNet(std::move(nodes), std::move(parents), std::move(cpts));
}

double family_bic(const Dataset& data, std::size_t v, std::span<const std::size_t> parents) {
    const auto& cards = data.cardinalities();
    double configs = 1.0;
    for (auto p : parents) configs *= cards[p];
    if (configs > kMaxParentConfigs) {
        throw DataError(fmt::format("bic: node '{}' has {} parent configurations (limit 1e7)", data.names()[v], configs));
    }
    const std::size_t m = data.rows();
    const int cv = cards[v];
    // counts keyed by parent configuration; sparse so wide families stay cheap
    std::unordered_map<std::size_t, std::vector<std::size_t>> counts;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t c = 0;
        for (auto p : parents) c = c * cards[p] + data(i, p);
        auto& slot = counts[c];
        if (slot.empty()) slot.assign(cv, 0);
        ++slot[data(i, v)];
    }
    // sum in configuration order so the result does not depend on hash layout
    std::vector<std::size_t> keys;
    keys.reserve(counts.size());
    for (const auto& kv : counts) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    double ll = 0.0;
    for (auto key : keys) {
        const auto& nk = counts[key];
        const double total = static_cast<double>(std::accumulate(nk.begin(), nk.end(), std::size_t{0}));
        for (auto c : nk)
            if (c > 0) ll += static_cast<double>(c) * std::log(static_cast<double>(c) / total);
    }
    const double params = (cv - 1) * configs;
    return ll - 0.5 * std::log(static_cast<double>(m)) * params;
}

double bic_score(const Dag& dag, const Dataset& data) {
    if (dag.size() != data.cols()) throw UsageError("bic_score: DAG size does not match dataset width");
    double total = 0.0;
    for (std::size_t v = 0; v < dag.size(); ++v) {
        auto pa = dag.parents(v);
        total += family_bic(data, v, pa);
    }
    return total;
}

}  // namespace drsl
