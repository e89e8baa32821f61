#include "drsl/hill_climb.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <map>

#include "drsl/error.hpp"

namespace drsl {

namespace {

class FamilyCache {
public:
    explicit FamilyCache(const Dataset& data) : data_(data) {}

    double operator()(std::size_t v, const std::vector<std::size_t>& parents) {
        auto key = std::make_pair(v, parents);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double s = family_bic(data_, v, parents);
        cache_.emplace(std::move(key), s);
        return s;
    }

private:
    const Dataset& data_;
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> cache_;
};

std::vector<std::size_t> with(std::vector<std::size_t> pa, std::size_t u) {
    pa.insert(std::lower_bound(pa.begin(), pa.end(), u), u);
    return pa;
}

std::vector<std::size_t> without(std::vector<std::size_t> pa, std::size_t u) {
    pa.erase(std::find(pa.begin(), pa.end(), u));
    return pa;
}

double total(const Dag& g, FamilyCache& fam) {
    double s = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) s += fam(v, g.parents(v));
    return s;
}

void climb(Dag& g, FamilyCache& fam, const Skeleton* skel, std::size_t max_iters) {
    const std::size_t n = g.size();
    auto allowed = [&](std::size_t u, std::size_t v) {
        return !skel || skel->edges.count({std::min(u, v), std::max(u, v)}) > 0;
    };
    for (std::size_t it = 0; it < max_iters; ++it) {
        int best_type = -1;
        std::size_t bu = 0, bv = 0;
        double best = 1e-9;
        auto consider = [&](int type, std::size_t u, std::size_t v, double delta) {
            if (delta > best) {
                best = delta;
                best_type = type;
                bu = u;
                bv = v;
            }
        };
        // 0: add u->v
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) {
                if (u == v || g.has_edge(u, v) || g.has_edge(v, u) || !allowed(u, v)) continue;
                if (g.reachable(v, u)) continue;
                const auto pa = g.parents(v);
                consider(0, u, v, fam(v, with(pa, u)) - fam(v, pa));
            }
        // 1: delete u->v
        for (auto [u, v] : g.edges()) {
            const auto pa = g.parents(v);
            consider(1, u, v, fam(v, without(pa, u)) - fam(v, pa));
        }
        // 2: reverse u->v
        for (auto [u, v] : g.edges()) {
            if (!allowed(u, v)) continue;
            Dag h = g;
            h.remove_edge(u, v);
            if (h.reachable(u, v)) continue;
            const auto pv = g.parents(v), pu = g.parents(u);
            consider(2, u, v, fam(v, without(pv, u)) - fam(v, pv) + fam(u, with(pu, v)) - fam(u, pu));
        }
        if (best_type < 0) return;
        if (best_type == 0) {
            g.add_edge(bu, bv);
        } else if (best_type == 1) {
            g.remove_edge(bu, bv);
        } else {
            g.remove_edge(bu, bv);
            g.add_edge(bv, bu);
        }
        if (!g.is_acyclic()) throw SolverError("hill climbing produced a cycle");
    }
}

}  // namespace

Dag hill_climb(const Dataset& data, const Skeleton* skeleton, const HillClimbConfig& config) {
    const std::size_t n = data.cols();
    if (skeleton && skeleton->size() != n) throw UsageError("skeleton size does not match the dataset width");
    FamilyCache fam(data);
    Dag best(n);
    climb(best, fam, skeleton, config.max_iters);
    double best_score = total(best, fam);

    Rng rng(derive_seed({config.seed, 0x4c1ULL}));
    for (std::size_t round = 0; round < config.restarts; ++round) {
        Dag g = best;
        // random perturbation: n toggles of allowed pairs that keep acyclicity
        for (std::size_t k = 0; k < n; ++k) {
            const auto u = rng.index(n), v = rng.index(n);
            if (u == v) continue;
            if (skeleton && !skeleton->edges.count({std::min(u, v), std::max(u, v)})) continue;
            if (g.has_edge(u, v)) {
                g.remove_edge(u, v);
            } else if (!g.has_edge(v, u) && !g.reachable(v, u)) {
                g.add_edge(u, v);
            }
        }
        climb(g, fam, skeleton, config.max_iters);
        const double s = total(g, fam);
        if (s > best_score + 1e-9) {
            best = std::move(g);
            best_score = s;
        }
    }
    return best;
}

std::string dag_to_json(const Dag& dag, const std::vector<std::string>& names) {
    if (names.size() != dag.size()) throw UsageError("dag_to_json: name count mismatch");
    nlohmann::ordered_json doc;
    doc["nodes"] = names;
    auto edges = nlohmann::ordered_json::array();
    for (auto [u, v] : dag.edges()) edges.push_back({names[u], names[v]});
    doc["edges"] = edges;
    return doc.dump(1) + "\n";
}

Dag parse_dag(const std::string& text, const std::vector<std::string>& names) {
    try {
        const auto doc = nlohmann::json::parse(text);
        const auto nm = doc.contains("nodes") ? doc.at("nodes").get<std::vector<std::string>>() : names;
        auto index = [&](const std::string& s) {
            for (std::size_t k = 0; k < nm.size(); ++k)
                if (nm[k] == s) return k;
            throw DataError(fmt::format("DAG: unknown node name '{}'", s));
        };
        std::set<std::pair<std::size_t, std::size_t>> edges;
        for (const auto& e : doc.at("edges")) {
            if (e.size() != 2) throw DataError("DAG: each edge must have two endpoints");
            if (!edges.insert({index(e[0].get<std::string>()), index(e[1].get<std::string>())}).second)
                throw DataError("DAG: duplicate edge");
        }
        return Dag(nm.size(), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("DAG JSON: {}", e.what()));
    }
}

}  // namespace drsl
