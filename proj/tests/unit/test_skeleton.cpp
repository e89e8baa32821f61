#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "drsl/error.hpp"
#include "drsl/evaluation.hpp"
#include "drsl/skeleton.hpp"
#include "helpers.hpp"

using namespace drsl;

namespace {

// A, B = A, C independent: the four distinct states, repeated.
Dataset copy_enumeration(std::size_t reps) {
    std::vector<int> vals;
    for (std::size_t k = 0; k < reps; ++k)
        for (int a : {0, 1})
            for (int c : {0, 1}) vals.insert(vals.end(), {a, a, c});
    return Dataset({"A", "B", "C"}, {2, 2, 2}, vals);
}

EstimatorConfig estimator(EstimatorKind kind, Encoding scheme, double hyper) {
    EstimatorConfig cfg;
    cfg.kind = kind;
    cfg.scheme = scheme;
    cfg.lambda = hyper;
    cfg.epsilon0 = hyper;
    cfg.adam.lr = 0.1;
    cfg.adam.iters = 60;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("independent target with an adequate penalty has no neighbors") {
    const auto data = sample(testing::independent({2, 3, 2, 2}), 2000, 1);
    const auto cfg = estimator(EstimatorKind::Reg, Encoding::Effects, 0.05);
    for (std::size_t r = 0; r < data.cols(); ++r) CHECK(learn_neighbors(data, r, cfg, 0.01).empty());
    const auto big = estimator(EstimatorKind::Reg, Encoding::Dummy, 10.0);
    CHECK(learn_skeleton(data, big, 0.0).edges.empty());
}

TEST_CASE("copy pair is recovered by every estimator") {
    const auto data = copy_enumeration(25);
    for (auto kind : {EstimatorKind::Reg, EstimatorKind::Kl, EstimatorKind::Wass})
        for (auto scheme : {Encoding::Dummy, Encoding::Effects}) {
            const auto cfg = estimator(kind, scheme, kind == EstimatorKind::Reg ? 0.01 : 0.1);
            CHECK(learn_neighbors(data, 1, cfg, 0.1) == std::set<std::size_t>{0});
            CHECK(learn_neighbors(data, 0, cfg, 0.1) == std::set<std::size_t>{1});
            CHECK(learn_neighbors(data, 1, cfg, std::numeric_limits<double>::infinity()).empty());
        }
}

TEST_CASE("cancer noisefree KL recovers the true skeleton") {
    const auto net = testing::load_fixture("cancer");
    const auto data = sample(net, 1000, 0);
    const auto cfg = estimator(EstimatorKind::Kl, Encoding::Effects, 1.0);
    const auto skel = learn_skeleton(data, cfg, 0.15);
    CHECK(f1_skeleton(skel.edges, net.dag().skeleton(), net.size()) == 1.0);
}

TEST_CASE("skeleton invariants, union symmetry and threshold monotonicity") {
    const auto net = testing::load_fixture("asia");
    const auto data = sample(net, 1000, 2);
    const auto cfg = estimator(EstimatorKind::Reg, Encoding::Dummy, 0.003);
    const auto skel = learn_skeleton(data, cfg, 0.25);
    for (auto [u, v] : skel.edges) {
        CHECK(u < v);
        CHECK(std::max(skel.scores.at({u, v}), skel.scores.at({v, u})) > 0.25);
    }
    for (const auto& [key, s] : skel.scores) {
        CHECK(key.first != key.second);
        CHECK(s >= 0.0);
    }

    // swapping which endpoint proposed each edge leaves the union unchanged
    std::map<std::pair<std::size_t, std::size_t>, double> swapped;
    for (const auto& [key, s] : skel.scores) swapped[{key.second, key.first}] = s;
    CHECK(threshold_scores(skel.names, swapped, 0.25).edges == skel.edges);

    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double tau : {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 10.0}) {
        const auto s = threshold_scores(skel.names, skel.scores, tau);
        CHECK(s.edges.size() <= prev);
        prev = s.edges.size();
        const auto a = threshold_scores(skel.names, skel.scores, tau, Aggregation::And);
        for (const auto& e : a.edges) CHECK(s.edges.count(e));
    }
}

TEST_CASE("permuting nodes permutes the skeleton") {
    const auto net = testing::load_fixture("earthquake");
    const auto data = sample(net, 400, 3);
    const std::vector<std::size_t> order{3, 0, 4, 2, 1};
    const auto perm = data.permute_columns(order);
    for (auto kind : {EstimatorKind::Reg, EstimatorKind::Kl, EstimatorKind::Wass}) {
        const auto cfg = estimator(kind, Encoding::Effects, kind == EstimatorKind::Reg ? 0.05 : 1.0);
        const auto a = learn_skeleton(data, cfg, 0.3);
        const auto b = learn_skeleton(perm, cfg, 0.3);
        std::set<std::pair<std::size_t, std::size_t>> mapped;
        for (auto [u, v] : b.edges) mapped.insert({std::min(order[u], order[v]), std::max(order[u], order[v])});
        CHECK(mapped == a.edges);
        for (const auto& [key, s] : b.scores)
            CHECK(s == doctest::Approx(a.scores.at({order[key.first], order[key.second]})).epsilon(1e-6));
    }
}

TEST_CASE("thread count does not change the result") {
    const auto data = sample(testing::load_fixture("asia"), 300, 4);
    const auto cfg = estimator(EstimatorKind::Wass, Encoding::Dummy, 1.0);
    CHECK(learn_skeleton(data, cfg, 0.3, Aggregation::Union, 1) == learn_skeleton(data, cfg, 0.3, Aggregation::Union, 3));
}

TEST_CASE("node failures name the node") {
    const auto data = sample(testing::load_fixture("cancer"), 100, 4);
    auto cfg = estimator(EstimatorKind::Kl, Encoding::Dummy, -1.0);
    try {
        learn_skeleton(data, cfg, 0.1);
        FAIL("expected an error");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("node 'Pollution'") != std::string::npos);
    }
    CHECK_THROWS_AS(learn_neighbors(data, 0, estimator(EstimatorKind::Reg, Encoding::Dummy, 0.1), -1.0), UsageError);
}

TEST_CASE("skeleton JSON round-trip") {
    const auto data = sample(testing::load_fixture("survey"), 500, 6);
    const auto skel = learn_skeleton(data, estimator(EstimatorKind::Reg, Encoding::Dummy, 0.01), 0.1);
    const auto back = parse_skeleton(skeleton_to_json(skel));
    CHECK(back.names == skel.names);
    CHECK(back.edges == skel.edges);
    REQUIRE(back.scores.size() == skel.scores.size());
    for (const auto& [key, s] : skel.scores) CHECK(back.scores.at(key) == s);
    CHECK_THROWS_AS(parse_skeleton(R"({"edges":[["A","Nope"]]})", {"A", "B"}), DataError);
    CHECK(parse_skeleton(R"({"edges":[["B","A"]]})", {"A", "B"}).edges ==
          std::set<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("estimator names") {
    CHECK(parse_estimator("wass") == EstimatorKind::Wass);
    CHECK(to_string(EstimatorKind::Kl) == "kl");
    CHECK_THROWS_AS(parse_estimator("mmpc"), UsageError);
}
