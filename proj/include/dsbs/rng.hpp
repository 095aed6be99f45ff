#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace dsbs {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to derive child seeds from a parent seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Counter-based random stream. Two streams with the same (seed, stream id) produce
/// identical sequences; distinct stream ids are statistically independent, so each
/// particle can own a stream without any shared state.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    double uniform() noexcept;
    /// Standard normal via Box-Muller; pairs are consumed in order.
    double normal() noexcept;
    void fill_normal(std::span<double> out) noexcept;
    /// Uniform integer in [0, bound) by rejection (bound > 0).
    std::uint64_t below(std::uint64_t bound) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> block_{};
    int block_pos_ = 2;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace dsbs
