#pragma once

#include <string>
#include <vector>

#include "drsl/bn.hpp"
#include "drsl/lossmoments.hpp"
#include "drsl/rng.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(DRSL_DATA_DIR) + "/networks/" + name + ".json"; }

inline drsl::DiscreteBayesNet load_fixture(const std::string& name) { return drsl::load_network(fixture(name)); }

/// Two-node chain A -> B where B copies A.
inline drsl::DiscreteBayesNet copy_pair(double pa = 0.5) {
    return drsl::DiscreteBayesNet({{"A", 2}, {"B", 2}}, {{}, {0}}, {{{pa, 1.0 - pa}}, {{1.0, 0.0}, {0.0, 1.0}}});
}

/// n independent uniform variables with the given cardinalities.
inline drsl::DiscreteBayesNet independent(const std::vector<int>& cards) {
    std::vector<drsl::Node> nodes;
    std::vector<std::vector<std::size_t>> parents(cards.size());
    std::vector<std::vector<std::vector<double>>> cpts;
    for (std::size_t j = 0; j < cards.size(); ++j) {
        nodes.push_back({"V" + std::to_string(j), cards[j]});
        cpts.push_back({std::vector<double>(cards[j], 1.0 / cards[j])});
    }
    return drsl::DiscreteBayesNet(nodes, parents, cpts);
}

inline drsl::WeightMatrix random_weights(const drsl::EncodedView& view, drsl::Rng& rng, double scale = 1.0) {
    auto W = drsl::WeightMatrix::zeros(view);
    for (Eigen::Index i = 0; i < W.W.rows(); ++i)
        for (Eigen::Index k = 0; k < W.W.cols(); ++k) W.W(i, k) = scale * (2.0 * rng.uniform() - 1.0);
    return W;
}

/// Independent uniform features A, B, C and a noisy target T depending on A and B.
inline drsl::Dataset conditioned_data(std::size_t m, std::uint64_t seed) {
    std::vector<drsl::Node> nodes{{"A", 3}, {"B", 2}, {"C", 3}, {"T", 2}};
    std::vector<std::vector<std::size_t>> parents{{}, {}, {}, {0, 1}};
    std::vector<std::vector<std::vector<double>>> cpts{
        {{1 / 3.0, 1 / 3.0, 1 / 3.0}},
        {{0.5, 0.5}},
        {{1 / 3.0, 1 / 3.0, 1 / 3.0}},
        {{0.9, 0.1}, {0.7, 0.3}, {0.5, 0.5}, {0.2, 0.8}, {0.3, 0.7}, {0.1, 0.9}}};
    return drsl::sample(drsl::DiscreteBayesNet(nodes, parents, cpts), m, seed);
}

inline std::vector<int> random_cards(drsl::Rng& rng, std::size_t n, int max_card) {
    std::vector<int> c(n);
    for (auto& x : c) x = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(max_card - 1)));
    return c;
}

}  // namespace testing
