#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vlq::rng {

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Combines a key with one more index. Not symmetric: mix(a, b) != mix(b, a).
constexpr std::uint64_t mix(std::uint64_t key, std::uint64_t index) noexcept
{
    return splitmix64(key ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Derives a stream key from a seed and any number of integer indices.
template <class... Ints>
constexpr std::uint64_t derive(std::uint64_t seed, Ints... indices) noexcept
{
    std::uint64_t key = splitmix64(seed);
    ((key = mix(key, static_cast<std::uint64_t>(indices))), ...);
    return key;
}

/// Maps 64 random bits to a double uniform on [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based stream: draw i is a pure function of (key, i), so streams
/// can be created anywhere without shared state and replayed exactly.
class CounterStream {
public:
    constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_u64() noexcept { return mix(key_, counter_++); }
    constexpr double uniform() noexcept { return to_unit(next_u64()); }

    /// Uniform on (0, 1]; safe as a logarithm argument.
    constexpr double uniform_open() noexcept { return 1.0 - uniform(); }

    double normal() noexcept
    {
        // Box-Muller, one variate per call; the partner is discarded so that
        // the draw count stays a fixed function of the call count.
        double const r = std::sqrt(-2.0 * std::log(uniform_open()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

    constexpr double rademacher() noexcept { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace vlq::rng
