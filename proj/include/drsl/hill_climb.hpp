#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "drsl/bn.hpp"
#include "drsl/skeleton.hpp"

namespace drsl {

struct HillClimbConfig {
    std::size_t max_iters = 10000;
    std::size_t restarts = 0;  // perturb-and-reclimb rounds after the first climb
    std::uint64_t seed = 0;
};

/// Greedy BIC search from the empty graph over add/delete/reverse moves. When a
/// skeleton is given, adds and reverses are limited to its edges. Ties go to
/// the earlier move type (add, delete, reverse), then the smaller edge.
Dag hill_climb(const Dataset& data, const Skeleton* skeleton = nullptr, const HillClimbConfig& config = {});

/// {"edges":[[u,v],...]} with node names.
std::string dag_to_json(const Dag& dag, const std::vector<std::string>& names);
Dag parse_dag(const std::string& text, const std::vector<std::string>& names);

}  // namespace drsl
