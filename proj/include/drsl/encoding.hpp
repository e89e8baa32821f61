#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drsl/bn.hpp"

namespace drsl {

/// Category-to-vector maps. Both use the last category as the reference.
enum class Encoding { Dummy, Effects };

Encoding parse_encoding(const std::string& name);
std::string to_string(Encoding scheme);

/// Length c-1 vector: e_k for k < c-1; zeros (Dummy) or all -1 (Effects) for k = c-1.
std::vector<int> encode_value(Encoding scheme, int cardinality, int value);

/// Concatenated encodings in node-index order, optionally skipping one node.
std::vector<int> encode_sample(Encoding scheme, std::span<const int> cardinalities, std::span<const int> row,
                               std::optional<std::size_t> exclude = std::nullopt);

/// Block layout of the concatenated encoding for one target node r.
///
/// "Feature" offsets index the vector with node r removed; "full" offsets index
/// the vector over all nodes.
class EncodedView {
public:
    EncodedView() = default;
    EncodedView(std::vector<int> cardinalities, std::size_t target);

    std::size_t nodes() const { return cards_.size(); }
    std::size_t target() const { return target_; }
    const std::vector<int>& cardinalities() const { return cards_; }

    std::size_t width(std::size_t node) const { return static_cast<std::size_t>(cards_[node] - 1); }
    std::size_t full_offset(std::size_t node) const { return full_offsets_[node]; }
    std::size_t full_width() const { return full_offsets_.back(); }

    /// Offset of node's block inside ℰ(x_r̄). Undefined for the target.
    std::size_t feature_offset(std::size_t node) const { return feature_offsets_[node]; }
    std::size_t feature_width() const { return full_width() - target_width(); }
    std::size_t target_width() const { return width(target_); }

    /// Non-target nodes in index order.
    const std::vector<std::size_t>& features() const { return features_; }

private:
    std::vector<int> cards_;
    std::size_t target_ = 0;
    std::vector<std::size_t> full_offsets_;
    std::vector<std::size_t> feature_offsets_;
    std::vector<std::size_t> features_;
};

/// Encoded design for one node regression: X is m x ρ_r̄, Y is m x ρ_r.
struct EncodedProblem {
    EncodedView view;
    Encoding scheme = Encoding::Dummy;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
};

EncodedProblem encode_problem(const Dataset& data, std::size_t target, Encoding scheme);

/// Writes the encoding of `value` into out[0 .. c-2].
void encode_into(Encoding scheme, int cardinality, int value, double* out);

/// ∥ℰ(a) - ℰ(b)∥₁ for one variable.
int encoding_distance(Encoding scheme, int cardinality, int a, int b);

}  // namespace drsl
