#include <doctest.h>

#include <cmath>

#include "drsl/error.hpp"
#include "drsl/evaluation.hpp"
#include "helpers.hpp"

using namespace drsl;

TEST_CASE("F1 examples") {
    const EdgeSet truth{{0, 1}, {1, 2}};
    CHECK(f1_skeleton(truth, truth, 3) == 1.0);
    CHECK(f1_skeleton({{0, 1}, {0, 2}}, truth, 3) == doctest::Approx(0.5));
    CHECK(f1_skeleton({}, truth, 3) == 0.0);
    CHECK(f1_skeleton({}, {}, 3) == 1.0);
    CHECK(f1_skeleton({{0, 2}}, truth, 3) == 0.0);
    // orientation is ignored
    CHECK(f1_skeleton({{1, 0}, {2, 1}}, truth, 3) == 1.0);
    CHECK(undirected({{2, 1}, {1, 2}, {0, 3}}) == EdgeSet{{1, 2}, {0, 3}});
}

TEST_CASE("F1 is bounded and adding a correct edge never lowers it") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.index(5);
        EdgeSet truth, est;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) {
                if (rng.uniform() < 0.3) truth.insert({u, v});
                if (rng.uniform() < 0.3) est.insert({u, v});
            }
        const double f = f1_skeleton(est, truth, n);
        CHECK((f >= 0.0 && f <= 1.0));
        std::size_t tp = 0;
        for (const auto& e : est) tp += truth.count(e);
        const double fp = static_cast<double>(est.size() - tp), fn = static_cast<double>(truth.size() - tp);
        if (!est.empty() || !truth.empty()) CHECK(f == doctest::Approx(2.0 * tp / (2.0 * tp + fp + fn)));
        for (const auto& e : truth) {
            if (est.count(e)) continue;
            auto more = est;
            more.insert(e);
            CHECK(f1_skeleton(more, truth, n) >= f);
        }
    }
}

TEST_CASE("F1 rejects pairs outside the node range") {
    CHECK_THROWS(f1_skeleton({{0, 5}}, {{0, 1}}, 3));
}

TEST_CASE("held-out BIC equals training BIC when the splits coincide") {
    const auto data = sample(testing::load_fixture("asia"), 1000, 1);
    const Dag empty(data.cols());
    CHECK(bic_heldout(empty, data, data, 0.0) == doctest::Approx(bic_score(empty, data)).epsilon(1e-12));
    const auto dag = testing::load_fixture("asia").dag();
    CHECK(bic_heldout(dag, data, data, 0.0) == doctest::Approx(bic_score(dag, data)).epsilon(1e-12));
}

TEST_CASE("unseen parent configurations contribute the uniform log-probability") {
    // train only ever sees A = 0; test rows with A = 1 fall back to add-one on zero counts
    Dataset train({"A", "B"}, {2, 3}, {0, 0, 0, 1, 0, 0});
    Dataset test({"A", "B"}, {2, 3}, {1, 2, 1, 0});
    const Dag dag(2, {{0, 1}});
    // A: counts (3, 0) → P(A=1) = 1/5 with α = 1; B | A=1: unseen → 1/3
    const double expected = 2 * std::log(1.0 / 5.0) + 2 * std::log(1.0 / 3.0) - 0.5 * std::log(2.0) * (1 + 2 * 2);
    CHECK(bic_heldout(dag, train, test, 1.0) == doctest::Approx(expected));
}

TEST_CASE("an edge irrelevant on train lowers the held-out score") {
    const auto net = testing::independent({2, 2, 3});
    const auto train = sample(net, 5000, 2);
    const auto test = sample(net, 5000, 3);
    const Dag empty(3);
    for (auto [u, v] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 0}, {1, 2}}) {
        const Dag one(3, {{u, v}});
        CHECK(bic_heldout(one, train, test) < bic_heldout(empty, train, test));
    }
}

TEST_CASE("held-out BIC validation") {
    const auto a = sample(testing::load_fixture("cancer"), 10, 1);
    Dataset b({"A"}, {2}, {0, 1});
    CHECK_THROWS_AS(bic_heldout(Dag(5), a, b), DataError);
    CHECK_THROWS_AS(bic_heldout(Dag(4), a, a), UsageError);
    CHECK_THROWS_AS(bic_heldout(Dag(5), a, a, -1.0), UsageError);
}

TEST_CASE("metrics row formatting") {
    MetricsRow r{"cancer", 5, 1000, "huber", 0.5, "kl[eps0=1]", 0.9, std::nullopt, std::nullopt, "3"};
    CHECK(format_metrics_row(r) == "cancer,5,1000,huber,0.5,kl[eps0=1],0.900000,,,3");
    CHECK(std::string(kMetricsHeader) == "dataset,n,m,noise,zeta,estimator,f1,bic,runtime_ms,seed");
}
