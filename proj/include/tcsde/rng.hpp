#pragma once

#include <cstdint>
#include <limits>

namespace tcsde {

/// Substreams of one Monte Carlo realization.
enum class SubstreamTag : std::uint32_t {
    Subordinator = 0,
    Brownian = 1,
    Bridge = 2,  // inner draws of the duality cross-check only
};

struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t realization_index = 0;
    SubstreamTag substream_tag = SubstreamTag::Subordinator;
};

/**
 * xoshiro256** generator whose 256-bit state is a hash of a StreamKey.
 *
 * Every (seed, realization, tag) triple owns its stream outright, so the
 * draws seen by realization j never depend on how many other realizations
 * ran before it or on which thread. Satisfies UniformRandomBitGenerator.
 */
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(const StreamKey& key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform_open();
    /// Exponential with unit mean.
    double exponential();
    /// Standard normal (Box-Muller, second variate cached).
    double normal();

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

RandomStream derive_stream(const StreamKey& key);

/// SplitMix64 finalizer; used for hash-splitting keys into seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace tcsde
