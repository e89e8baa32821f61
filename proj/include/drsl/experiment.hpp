#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drsl/contamination.hpp"
#include "drsl/evaluation.hpp"
#include "drsl/hill_climb.hpp"
#include "drsl/skeleton.hpp"

namespace drsl {

/// One estimator entry of a sweep: fixed settings plus a grid over its
/// hyperparameter (λ for reg, ε₀ for wass and kl).
struct EstimatorSpec {
    EstimatorConfig base;
    std::vector<double> grid;
    double threshold = 1e-2;
    Aggregation aggregation = Aggregation::Union;
};

struct SweepConfig {
    std::string label;                   // dataset column
    std::optional<DiscreteBayesNet> net;  // ground truth; sampled per cell
    std::optional<Dataset> data;          // fixed data when there is no network
    std::vector<std::size_t> m;
    std::vector<NoiseModel> noise{NoiseModel::None};
    std::vector<double> zeta{0.0};
    std::vector<EstimatorSpec> estimators;
    std::vector<std::uint64_t> seeds{0};
    std::size_t adversary_k = 20;
    std::size_t adversary_max_parents = 1;
    bool uniform_failure = false;
    bool bic = false;  // learn on a random half and score the HC DAG on the other
    double bic_alpha = 1.0;
    bool record_runtime = false;
    unsigned threads = 1;
};

/// Parses the JSON sweep file. Relative paths resolve against `base_dir`.
SweepConfig parse_sweep_config(const std::string& text, const std::string& base_dir);

/// "reg[lambda=0.1]" style label used in the estimator column.
std::string estimator_label(const EstimatorConfig& config);

/// Sweep column value, e.g. "kl[eps0=1;tau=0.15]"; ";and" marks AND aggregation.
std::string estimator_label(const EstimatorConfig& config, double threshold, Aggregation agg);

/// Sets the swept hyperparameter of `config`.
EstimatorConfig with_hyper(EstimatorConfig config, double value);

/// Per-seed rows in grid order, each cell's seeds contiguous.
std::vector<MetricsRow> run_sweep(const SweepConfig& config);

/// Appends mean and std rows for every cell with at least one seed.
std::vector<MetricsRow> aggregate_rows(const std::vector<MetricsRow>& rows);

/// Header comment + CSV header + rows.
std::string metrics_csv(const std::vector<MetricsRow>& rows, const std::string& comment = {});

/// The dataset a sweep cell learns from (sampled, then contaminated).
Dataset cell_dataset(const SweepConfig& config, std::size_t m, NoiseModel noise, double zeta, std::uint64_t seed);

}  // namespace drsl
