#include "drsl/skeleton.hpp"

#include <atomic>
#include <exception>
#include <fmt/format.h>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <thread>

#include "drsl/error.hpp"

namespace drsl {

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "wass") return EstimatorKind::Wass;
    if (name == "kl") return EstimatorKind::Kl;
    if (name == "reg") return EstimatorKind::Reg;
    throw UsageError(fmt::format("unknown estimator '{}' (expected wass, kl or reg)", name));
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Wass: return "wass";
        case EstimatorKind::Kl: return "kl";
        case EstimatorKind::Reg: return "reg";
    }
    return "?";
}

NodeFit fit_node(const Dataset& data, std::size_t target, const EstimatorConfig& config) {
    if (data.cols() < 2) throw DataError("skeleton learning needs at least two variables");
    NodeFit out;
    switch (config.kind) {
        case EstimatorKind::Reg: {
            auto erm = config.erm;
            erm.lambda = config.lambda;
            out.W = erm_fit(data, target, erm, config.scheme).W;
            break;
        }
        case EstimatorKind::Kl:
            out.W = kl_fit(data, target, config.epsilon0, config.scheme, config.lbfgs).W;
            break;
        case EstimatorKind::Wass: {
            const auto seed = derive_seed({config.seed, hash_name(data.names()[target])});
            out.W = wass_fit(data, target, config.epsilon0, config.adam, config.scheme, seed).W;
            break;
        }
    }
    out.scores.assign(data.cols(), 0.0);
    for (auto j : out.W.view.features()) out.scores[j] = out.W.block_norm(j);
    return out;
}

std::set<std::size_t> learn_neighbors(const Dataset& data, std::size_t target, const EstimatorConfig& config,
                                      double threshold) {
    if (!(threshold >= 0.0)) throw UsageError("threshold must be >= 0");
    const auto fit = fit_node(data, target, config);
    std::set<std::size_t> out;
    for (std::size_t j = 0; j < fit.scores.size(); ++j)
        if (j != target && fit.scores[j] > threshold) out.insert(j);
    return out;
}

Skeleton threshold_scores(std::vector<std::string> names,
                          const std::map<std::pair<std::size_t, std::size_t>, double>& scores, double threshold,
                          Aggregation agg) {
    if (!(threshold >= 0.0)) throw UsageError("threshold must be >= 0");
    Skeleton s{std::move(names), {}, scores};
    const std::size_t n = s.size();
    auto above = [&](std::size_t r, std::size_t i) {
        auto it = scores.find({r, i});
        return it != scores.end() && it->second > threshold;
    };
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) {
            const bool a = above(u, v), b = above(v, u);
            if (agg == Aggregation::Union ? (a || b) : (a && b)) s.edges.insert({u, v});
        }
    return s;
}

Skeleton learn_skeleton(const Dataset& data, const EstimatorConfig& config, double threshold, Aggregation agg,
                        unsigned threads, std::vector<NodeFit>* fits) {
    if (!(threshold >= 0.0)) throw UsageError("threshold must be >= 0");
    const std::size_t n = data.cols();
    if (n < 2) throw DataError("skeleton learning needs at least two variables");
    std::vector<NodeFit> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < n;) {
            try {
                results[r] = fit_node(data, r, config);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const unsigned pool = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::jthread> ts;
        for (unsigned k = 0; k < pool; ++k) ts.emplace_back(worker);
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (!errors[r]) continue;
        const auto& name = data.names()[r];
        try {
            std::rethrow_exception(errors[r]);
        } catch (const SolverError& e) {
            throw SolverError(fmt::format("node '{}': {}", name, e.what()));
        } catch (const DataError& e) {
            throw DataError(fmt::format("node '{}': {}", name, e.what()));
        } catch (const UsageError& e) {
            throw UsageError(fmt::format("node '{}': {}", name, e.what()));
        } catch (const std::exception& e) {
            throw SolverError(fmt::format("node '{}': {}", name, e.what()));
        }
    }
    std::map<std::pair<std::size_t, std::size_t>, double> scores;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < n; ++i)
            if (i != r) scores[{r, i}] = results[r].scores[i];
    if (fits) *fits = std::move(results);
    return threshold_scores(data.names(), scores, threshold, agg);
}

std::string skeleton_to_json(const Skeleton& skel) {
    nlohmann::ordered_json doc;
    doc["nodes"] = skel.names;
    auto edges = nlohmann::ordered_json::array();
    for (auto [u, v] : skel.edges) edges.push_back({skel.names[u], skel.names[v]});
    doc["edges"] = edges;
    auto scores = nlohmann::ordered_json::object();
    for (const auto& [key, val] : skel.scores) scores[skel.names[key.first] + "->" + skel.names[key.second]] = val;
    doc["scores"] = scores;
    return doc.dump(1) + "\n";
}

Skeleton parse_skeleton(const std::string& text, const std::vector<std::string>& names) {
    try {
        const auto doc = nlohmann::json::parse(text);
        Skeleton s;
        s.names = doc.contains("nodes") ? doc.at("nodes").get<std::vector<std::string>>() : names;
        if (s.names.empty()) throw DataError("skeleton: node names are unknown (no 'nodes' field)");
        auto index = [&](const std::string& nm) {
            for (std::size_t k = 0; k < s.names.size(); ++k)
                if (s.names[k] == nm) return k;
            throw DataError(fmt::format("skeleton: unknown node name '{}'", nm));
        };
        for (const auto& e : doc.at("edges")) {
            if (e.size() != 2) throw DataError("skeleton: each edge must have two endpoints");
            auto u = index(e[0].get<std::string>()), v = index(e[1].get<std::string>());
            if (u == v) throw DataError("skeleton: self-loop");
            s.edges.insert({std::min(u, v), std::max(u, v)});
        }
        if (doc.contains("scores")) {
            for (const auto& [key, val] : doc.at("scores").items()) {
                const auto pos = key.find("->");
                if (pos == std::string::npos) throw DataError(fmt::format("skeleton: bad score key '{}'", key));
                s.scores[{index(key.substr(0, pos)), index(key.substr(pos + 2))}] = val.get<double>();
            }
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("skeleton JSON: {}", e.what()));
    }
}

}  // namespace drsl
