#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace itrop {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Folds one more component into a stream key.
constexpr std::uint64_t combine_key(std::uint64_t key, std::uint64_t component) noexcept
{
    return mix64(key ^ mix64(component + 0x9e3779b97f4a7c15ULL));
}

/**
 * xoshiro256** generator.
 *
 * Satisfies UniformRandomBitGenerator so it plugs into <random>
 * distributions, but the library draws uniforms and indices through the
 * member helpers below, which are bit-exact across standard libraries.
 */
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept
    {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            word = mix64(sm);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Unbiased uniform integer in [0, bound); bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound) noexcept
    {
        // Lemire's multiply-shift with rejection.
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

/// Identifies one ensemble member: every stream of run `run` derives from it.
struct RunLineage {
    std::uint64_t master_seed = 0;
    std::uint64_t run = 0;
};

/**
 * Counter-keyed random stream.
 *
 * The key is a hash of (master_seed, run, step) and of any substream ids
 * appended afterwards, so the numbers a stream produces depend only on its
 * coordinates and never on execution order.
 */
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t run, std::uint64_t step) noexcept
        : master_seed_(master_seed), run_(run), step_(step),
          key_(combine_key(combine_key(combine_key(0x6a09e667f3bcc908ULL, master_seed), run), step))
    {
    }

    RngStream(RunLineage lineage, std::uint64_t step) noexcept
        : RngStream(lineage.master_seed, lineage.run, step)
    {
    }

    /// Child stream; distinct ids give independent children.
    RngStream substream(std::uint64_t id) const noexcept
    {
        RngStream child = *this;
        child.key_ = combine_key(key_, id);
        ++child.depth_;
        return child;
    }

    /// Fresh generator positioned at the start of this stream.
    Xoshiro256 engine() const noexcept { return Xoshiro256(key_); }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t run() const noexcept { return run_; }
    std::uint64_t step() const noexcept { return step_; }
    std::uint64_t key() const noexcept { return key_; }
    unsigned depth() const noexcept { return depth_; }

private:
    std::uint64_t master_seed_;
    std::uint64_t run_;
    std::uint64_t step_;
    std::uint64_t key_;
    unsigned depth_ = 0;
};

}  // namespace itrop
