#pragma once

#include <array>
#include <cstdint>

namespace pdcal {

/// Counter-based random stream (Philox4x32-10).
///
/// The 128-bit counter is laid out as (block, lane, stream_id lo, stream_id hi)
/// and the key is the 64-bit seed, so every (seed, stream_id, lane) triple
/// addresses a disjoint slice of the generator's output. Lanes let a single
/// logical stream be cut into independently addressable pieces that can be
/// consumed in any order or on any thread.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane = 0) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint32_t lane() const noexcept { return lane_; }

    /// Fresh stream with the same seed and stream id on another lane.
    RngStream substream(std::uint32_t lane) const noexcept { return {seed_, stream_id_, lane}; }

    std::uint64_t next_u64() {
        if (used_ >= 4) refill();
        const std::uint64_t lo = buffer_[used_];
        const std::uint64_t hi = buffer_[used_ + 1];
        used_ += 2;
        return (hi << 32) | lo;
    }
    std::uint64_t operator()() { return next_u64(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal (ziggurat).
    double normal();

    /// Raw Philox4x32-10 bijection, exposed for known-answer tests.
    static constexpr std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                                         std::array<std::uint32_t, 2> key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint32_t lane_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

}  // namespace pdcal
