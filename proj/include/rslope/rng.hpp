#pragma once

#include <cstdint>
#include <limits>

namespace rslope {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key of stream `stream_id` under `master_seed`; distinct ids give
/// statistically independent streams, regardless of the order they are used in.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
{
    return mix64(master_seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the i-th output is mix64(key + i * golden gamma).
/// Satisfies UniformRandomBitGenerator, so it drives the std distributions.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t key) noexcept : key_(key) {}
    StreamRng(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
        : key_(derive_seed(master_seed, stream_id)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace rslope
