#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace drsl {

/// SplitMix64 finalizer; used to derive independent seeds from tuples.
std::uint64_t splitmix64(std::uint64_t x);

/// Combines a list of integers into one seed. Order-sensitive.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// FNV-1a hash of a string, for seeding per-node streams by node name.
std::uint64_t hash_name(const std::string& name);

// xoshiro256** seeded through SplitMix64. Cheap to construct, so per-sample
// streams are affordable. All draws are built from raw 64-bit outputs, so
// results do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    /// Standard exponential draw.
    double exponential();

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    /// Draws k distinct values from [0, n) in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// Categorical draw from probabilities that sum to 1.
    std::size_t categorical(const double* probs, std::size_t n);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace drsl
