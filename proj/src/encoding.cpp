#include "drsl/encoding.hpp"

#include <fmt/format.h>

#include "drsl/error.hpp"

namespace drsl {

Encoding parse_encoding(const std::string& name) {
    if (name == "dummy") return Encoding::Dummy;
    if (name == "effects") return Encoding::Effects;
    throw UsageError(fmt::format("unknown encoding '{}' (expected dummy or effects)", name));
}

std::string to_string(Encoding scheme) { return scheme == Encoding::Dummy ? "dummy" : "effects"; }

namespace {

void check_value(int cardinality, int value) {
    if (cardinality < 2) throw DataError(fmt::format("cardinality {} is below 2", cardinality));
    if (value < 0 || value >= cardinality)
        throw DataError(fmt::format("category {} outside [0, {})", value, cardinality));
}

}  // namespace

void encode_into(Encoding scheme, int cardinality, int value, double* out) {
    const int w = cardinality - 1;
    if (value < w) {
        for (int k = 0; k < w; ++k) out[k] = k == value ? 1.0 : 0.0;
    } else {
        const double fill = scheme == Encoding::Dummy ? 0.0 : -1.0;
        for (int k = 0; k < w; ++k) out[k] = fill;
    }
}

std::vector<int> encode_value(Encoding scheme, int cardinality, int value) {
    check_value(cardinality, value);
    std::vector<double> buf(cardinality - 1);
    encode_into(scheme, cardinality, value, buf.data());
    return {buf.begin(), buf.end()};
}

std::vector<int> encode_sample(Encoding scheme, std::span<const int> cardinalities, std::span<const int> row,
                               std::optional<std::size_t> exclude) {
    if (cardinalities.size() != row.size()) throw DataError("encode_sample: row width does not match cardinalities");
    std::vector<int> out;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (exclude && *exclude == j) continue;
        auto e = encode_value(scheme, cardinalities[j], row[j]);
        out.insert(out.end(), e.begin(), e.end());
    }
    return out;
}

int encoding_distance(Encoding scheme, int cardinality, int a, int b) {
    if (a == b) return 0;
    const int ref = cardinality - 1;
    if (a != ref && b != ref) return 2;
    // one side is the reference category
    return scheme == Encoding::Dummy ? 1 : cardinality;
}

EncodedView::EncodedView(std::vector<int> cardinalities, std::size_t target)
    : cards_(std::move(cardinalities)), target_(target) {
    if (target_ >= cards_.size()) throw UsageError("target node out of range");
    full_offsets_.assign(cards_.size() + 1, 0);
    feature_offsets_.assign(cards_.size(), 0);
    std::size_t feat = 0;
    for (std::size_t j = 0; j < cards_.size(); ++j) {
        if (cards_[j] < 2) throw DataError(fmt::format("node {} has cardinality below 2", j));
        full_offsets_[j + 1] = full_offsets_[j] + width(j);
        if (j == target_) continue;
        feature_offsets_[j] = feat;
        feat += width(j);
        features_.push_back(j);
    }
}

EncodedProblem encode_problem(const Dataset& data, std::size_t target, Encoding scheme) {
    EncodedProblem p;
    p.view = EncodedView(data.cardinalities(), target);
    p.scheme = scheme;
    const auto m = static_cast<Eigen::Index>(data.rows());
    p.X.resize(m, static_cast<Eigen::Index>(p.view.feature_width()));
    p.Y.resize(m, static_cast<Eigen::Index>(p.view.target_width()));
    const auto& cards = data.cardinalities();
    std::vector<double> buf;
    for (Eigen::Index i = 0; i < m; ++i) {
        auto row = data.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < row.size(); ++j) {
            buf.resize(cards[j] - 1);
            encode_into(scheme, cards[j], row[j], buf.data());
            if (j == target) {
                for (std::size_t k = 0; k < buf.size(); ++k) p.Y(i, static_cast<Eigen::Index>(k)) = buf[k];
            } else {
                const auto off = p.view.feature_offset(j);
                for (std::size_t k = 0; k < buf.size(); ++k) p.X(i, static_cast<Eigen::Index>(off + k)) = buf[k];
            }
        }
    }
    return p;
}

}  // namespace drsl
