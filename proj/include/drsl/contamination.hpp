#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "drsl/bn.hpp"

namespace drsl {

enum class NoiseModel { None, Huber, Independent };

NoiseModel parse_noise(const std::string& name);
std::string to_string(NoiseModel model);

/// Uniform mixture of Bayesian networks over the clean data's cardinalities.
class Adversary {
public:
    explicit Adversary(std::vector<DiscreteBayesNet> components);

    /// k random networks (Dirichlet(1) CPTs, up to max_parents parents each).
    static Adversary random(const std::vector<int>& cardinalities, std::size_t k, std::size_t max_parents,
                            std::uint64_t seed);

    std::vector<int> sample(Rng& rng) const;
    const std::vector<DiscreteBayesNet>& components() const { return components_; }

private:
    std::vector<DiscreteBayesNet> components_;
};

struct ContaminationConfig {
    NoiseModel model = NoiseModel::None;
    double zeta = 0.0;
    std::size_t adversary_k = 20;
    std::size_t adversary_max_parents = 1;
    std::uint64_t adversary_seed = 0;
    std::uint64_t seed = 0;
    bool uniform_failure = false;

    void validate() const;
};

struct Contaminated {
    Dataset data;
    std::vector<char> mask;  // per row (Huber) or per cell, row-major (independent)
};

/// Each row is replaced with probability ζ by a draw from the adversary.
Contaminated huber_contaminate(const Dataset& data, const Adversary& adv, double zeta, std::uint64_t seed);

/// Each cell is replaced with probability ζ. Replacements come from one
/// adversary draw per row, or from a uniform category when `uniform` is set.
Contaminated independent_failure(const Dataset& data, const Adversary& adv, double zeta, std::uint64_t seed,
                                 bool uniform = false);

/// Builds the adversary from the config and dispatches on the model.
Contaminated contaminate(const Dataset& data, const ContaminationConfig& config);

}  // namespace drsl
