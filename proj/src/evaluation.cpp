#include "drsl/evaluation.hpp"

#include <cmath>
#include <fmt/format.h>
#include <map>

#include "drsl/error.hpp"

namespace drsl {

EdgeSet undirected(const EdgeSet& edges) {
    EdgeSet out;
    for (auto [u, v] : edges) {
        if (u == v) throw DataError("edge set contains a self-loop");
        out.insert({std::min(u, v), std::max(u, v)});
    }
    return out;
}

double f1_skeleton(const EdgeSet& estimate, const EdgeSet& truth, std::size_t n) {
    const auto est = undirected(estimate), tru = undirected(truth);
    for (const auto* s : {&est, &tru})
        for (auto [u, v] : *s)
            if (v >= n) throw DataError(fmt::format("edge ({}, {}) is outside a {}-node graph", u, v, n));
    std::size_t tp = 0;
    for (const auto& e : est) tp += tru.count(e);
    const std::size_t fp = est.size() - tp, fn = tru.size() - tp;
    if (tp == 0) return fp + fn == 0 ? 1.0 : 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double bic_heldout(const Dag& dag, const Dataset& train, const Dataset& test, double alpha) {
    if (!(alpha >= 0.0)) throw UsageError("smoothing alpha must be >= 0");
    if (train.cardinalities() != test.cardinalities())
        throw DataError("test split categories do not match the training cardinalities");
    if (dag.size() != train.cols()) throw UsageError("DAG size does not match the dataset width");
    const auto& cards = train.cardinalities();
    double ll = 0.0, params = 0.0;
    for (std::size_t v = 0; v < dag.size(); ++v) {
        const auto pa = dag.parents(v);
        double configs = 1.0;
        for (auto p : pa) configs *= cards[p];
        if (configs > kMaxParentConfigs) throw DataError("bic_heldout: too many parent configurations");
        params += (cards[v] - 1) * configs;
        auto config_of = [&](const Dataset& d, std::size_t i) {
            std::size_t c = 0;
            for (auto p : pa) c = c * static_cast<std::size_t>(cards[p]) + static_cast<std::size_t>(d(i, p));
            return c;
        };
        std::map<std::size_t, std::vector<double>> counts;
        for (std::size_t i = 0; i < train.rows(); ++i) {
            auto& slot = counts[config_of(train, i)];
            if (slot.empty()) slot.assign(static_cast<std::size_t>(cards[v]), 0.0);
            slot[static_cast<std::size_t>(train(i, v))] += 1.0;
        }
        const double cv = cards[v];
        for (std::size_t i = 0; i < test.rows(); ++i) {
            const auto it = counts.find(config_of(test, i));
            const double nk = it == counts.end() ? 0.0 : it->second[static_cast<std::size_t>(test(i, v))];
            double tot = 0.0;
            if (it != counts.end())
                for (double c : it->second) tot += c;
            const double denom = tot + alpha * cv;
            ll += denom > 0.0 ? std::log((nk + alpha) / denom) : std::log(1.0 / cv);
        }
    }
    return ll - 0.5 * std::log(static_cast<double>(test.rows())) * params;
}

std::string format_metrics_row(const MetricsRow& r) {
    auto opt = [](const std::optional<double>& x) { return x ? fmt::format("{:.6f}", *x) : std::string(); };
    return fmt::format("{},{},{},{},{},{},{},{},{},{}", r.dataset, r.n, r.m, r.noise, r.zeta, r.estimator, opt(r.f1),
                       opt(r.bic), opt(r.runtime_ms), r.seed);
}

}  // namespace drsl
