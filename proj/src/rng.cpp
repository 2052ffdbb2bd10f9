#include "tcsde/rng.hpp"

#include <cmath>
#include <numbers>

namespace tcsde {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(const StreamKey& key) {
    // Chain the three key fields through the mixer; each stage is a bijection
    // of the running hash, so keys differing in any field land far apart.
    std::uint64_t h = mix64(key.master_seed);
    h = mix64(h ^ mix64(key.realization_index ^ 0x6a09e667f3bcc908ULL));
    h = mix64(h ^ mix64(static_cast<std::uint64_t>(key.substream_tag) ^ 0xbb67ae8584caa73bULL));
    // Expand into the xoshiro state with a SplitMix64 sequence.
    for (auto& word : s_) {
        h += kGolden;
        word = mix64(h - kGolden);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
}

RandomStream::result_type RandomStream::operator()() {
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

double RandomStream::uniform_open() {
    // 53-bit midpoint lattice: (k + 0.5) * 2^-53, k in [0, 2^53).
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential() { return -std::log(uniform_open()); }

double RandomStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

RandomStream derive_stream(const StreamKey& key) { return RandomStream(key); }

}  // namespace tcsde
