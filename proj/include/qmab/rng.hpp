#ifndef QMAB_RNG_HPP
#define QMAB_RNG_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace qmab {

// Counter-based SplitMix64 generator.
//
// Draw n of a stream with key K is mix(K + n * golden), so a stream is fully
// described by (key, counter). Child streams are derived by hashing a label
// into the key, which keeps environment noise, policy randomness and thermal
// bits independent of each other and of the order in which seeds are run.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) : key_(mix(key)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix(key_ + kGolden * counter_);
    }

    // Independent stream for a named component of one seeded episode.
    static Rng stream(std::uint64_t seed, std::string_view label) {
        return Rng(seed ^ hash_label(label));
    }

    Rng split(std::string_view label) const {
        return Rng(key_ ^ hash_label(label));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        return uniform() < p;
    }

    double normal() {
        return normal_(*this);
    }

    std::uint64_t counter() const { return counter_; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // FNV-1a, then mixed so short labels still spread over all bits.
    static std::uint64_t hash_label(std::string_view label) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return mix(h);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qmab

#endif
