#pragma once

// Deterministic shot sampling.  The stream is splitmix64 (Steele et al.,
// "Fast splittable pseudorandom number generators"); a sampler is identified
// by (seed, stream) and substreams are derived by hashing, so concurrent
// trials stay schedule-independent.

#include <cstdint>
#include <utility>

#include "clocksync/errors.hpp"

namespace clocksync {

class ShotSampler {
  public:
    explicit ShotSampler(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), state_(mix(seed ^ mix(stream ^ kGamma))) {}

    static constexpr const char* generator_name() { return "splitmix64"; }

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Independent child stream; derivation depends only on (seed, stream,
    // index), never on how much of this stream has been consumed.
    ShotSampler substream(std::uint64_t index) const {
        return ShotSampler(seed_, mix(stream_ + kGamma * (index + 1)));
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_;
};

// Binomial draw: number of +1 outcomes among nu shots with P(+1) = p_plus.
inline std::pair<long, long> sample_shots(double p_plus, long nu, ShotSampler& sampler) {
    if (!(p_plus >= -1e-12 && p_plus <= 1 + 1e-12)) {
        throw OutOfRangeError("p_plus outside [0, 1]");
    }
    if (nu < 1) throw OutOfRangeError("shot count must be positive");
    const double p = std::min(1.0, std::max(0.0, p_plus));
    long plus = 0;
    for (long i = 0; i < nu; ++i) {
        if (sampler.uniform() < p) ++plus;
    }
    return {plus, nu - plus};
}

}  // namespace clocksync
