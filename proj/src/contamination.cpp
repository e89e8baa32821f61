#include "drsl/contamination.hpp"

#include <fmt/format.h>

#include "drsl/error.hpp"

namespace drsl {

NoiseModel parse_noise(const std::string& name) {
    if (name == "none") return NoiseModel::None;
    if (name == "huber") return NoiseModel::Huber;
    if (name == "independent") return NoiseModel::Independent;
    throw UsageError(fmt::format("unknown noise model '{}' (expected none, huber or independent)", name));
}

std::string to_string(NoiseModel model) {
    switch (model) {
        case NoiseModel::None: return "none";
        case NoiseModel::Huber: return "huber";
        case NoiseModel::Independent: return "independent";
    }
    return "?";
}

Adversary::Adversary(std::vector<DiscreteBayesNet> components) : components_(std::move(components)) {
    if (components_.empty()) throw UsageError("adversary needs at least one component");
    for (const auto& c : components_)
        if (c.cardinalities() != components_.front().cardinalities())
            throw UsageError("adversary components disagree on cardinalities");
}

Adversary Adversary::random(const std::vector<int>& cardinalities, std::size_t k, std::size_t max_parents,
                            std::uint64_t seed) {
    if (k == 0) throw UsageError("adversary-k must be >= 1");
    const std::size_t n = cardinalities.size();
    const std::size_t mp = n > 0 ? std::min(max_parents, n - 1) : 0;
    std::vector<DiscreteBayesNet> comps;
    for (std::size_t c = 0; c < k; ++c) comps.push_back(random_network(n, mp, cardinalities, derive_seed({seed, c})));
    return Adversary(std::move(comps));
}

std::vector<int> Adversary::sample(Rng& rng) const {
    const auto& net = components_[rng.index(components_.size())];
    return sample_state(net, rng);
}

void ContaminationConfig::validate() const {
    if (!(zeta >= 0.0 && zeta <= 1.0)) throw UsageError(fmt::format("zeta {} is outside [0, 1]", zeta));
    if (adversary_k == 0) throw UsageError("adversary-k must be >= 1");
}

namespace {

void check(const Dataset& data, const Adversary& adv, double zeta) {
    if (!(zeta >= 0.0 && zeta <= 1.0)) throw UsageError(fmt::format("zeta {} is outside [0, 1]", zeta));
    if (adv.components().front().cardinalities() != data.cardinalities())
        throw UsageError("adversary cardinalities do not match the dataset");
}

}  // namespace

Contaminated huber_contaminate(const Dataset& data, const Adversary& adv, double zeta, std::uint64_t seed) {
    check(data, adv, zeta);
    Rng mask_rng(derive_seed({seed, 0x4b1ULL}));
    Rng adv_rng(derive_seed({seed, 0x4b2ULL}));
    std::vector<int> values = data.values();
    std::vector<char> mask(data.rows(), 0);
    const std::size_t n = data.cols();
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!(mask_rng.uniform() < zeta)) continue;
        mask[i] = 1;
        const auto s = adv.sample(adv_rng);
        std::copy(s.begin(), s.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return {Dataset(data.names(), data.cardinalities(), std::move(values)), std::move(mask)};
}

Contaminated independent_failure(const Dataset& data, const Adversary& adv, double zeta, std::uint64_t seed,
                                 bool uniform) {
    check(data, adv, zeta);
    Rng mask_rng(derive_seed({seed, 0x1f1ULL}));
    Rng adv_rng(derive_seed({seed, 0x1f2ULL}));
    std::vector<int> values = data.values();
    std::vector<char> mask(values.size(), 0);
    const std::size_t n = data.cols();
    const auto& cards = data.cardinalities();
    for (std::size_t i = 0; i < data.rows(); ++i) {
        // one replacement source per row, drawn whether or not any cell fails
        std::vector<int> src(n);
        if (uniform) {
            for (std::size_t j = 0; j < n; ++j) src[j] = static_cast<int>(adv_rng.index(static_cast<std::size_t>(cards[j])));
        } else {
            src = adv.sample(adv_rng);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!(mask_rng.uniform() < zeta)) continue;
            mask[i * n + j] = 1;
            values[i * n + j] = src[j];
        }
    }
    return {Dataset(data.names(), data.cardinalities(), std::move(values)), std::move(mask)};
}

Contaminated contaminate(const Dataset& data, const ContaminationConfig& config) {
    config.validate();
    if (config.model == NoiseModel::None) return {data, std::vector<char>(data.rows(), 0)};
    const auto adv =
        Adversary::random(data.cardinalities(), config.adversary_k, config.adversary_max_parents, config.adversary_seed);
    if (config.model == NoiseModel::Huber) return huber_contaminate(data, adv, config.zeta, config.seed);
    return independent_failure(data, adv, config.zeta, config.seed, config.uniform_failure);
}

}  // namespace drsl
