#include "pdcal/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pdcal {
namespace {

// 128-layer ziggurat for the standard normal (Marsaglia & Tsang; Doornik's layout).
struct Ziggurat {
    static constexpr int kLayers = 128;
    static constexpr double kR = 3.442619855899;
    static constexpr double kV = 9.91256303526217e-3;
    std::array<double, kLayers + 1> x{};
    std::array<double, kLayers> ratio{};

    Ziggurat() {
        double f = std::exp(-0.5 * kR * kR);
        x[0] = kV / f;
        x[1] = kR;
        x[kLayers] = 0.0;
        for (int i = 2; i < kLayers; ++i) {
            x[i] = std::sqrt(-2.0 * std::log(kV / x[i - 1] + f));
            f = std::exp(-0.5 * x[i] * x[i]);
        }
        for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
    }
};

const Ziggurat kZiggurat;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane) noexcept
    : seed_(seed), stream_id_(stream_id), lane_(lane) {}

void RngStream::refill() {
    if (block_ > 0xFFFFFFFFull) {
        throw std::overflow_error("RngStream: lane exhausted (2^32 blocks)");
    }
    const std::array<std::uint32_t, 4> counter{
        static_cast<std::uint32_t>(block_), lane_, static_cast<std::uint32_t>(stream_id_),
        static_cast<std::uint32_t>(stream_id_ >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = philox(counter, key);
    ++block_;
    used_ = 0;
}

double RngStream::normal() {
    const auto& zig = kZiggurat;
    for (;;) {
        const std::uint64_t bits = next_u64();
        const std::size_t layer = bits & 0x7F;
        const double u = 2.0 * ((static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53) - 1.0;
        if (std::fabs(u) < zig.ratio[layer]) return u * zig.x[layer];
        if (layer == 0) {
            // Base strip: Marsaglia's exact tail beyond r.
            double x, y;
            do {
                x = std::log(uniform()) / Ziggurat::kR;
                y = std::log(uniform());
            } while (-2.0 * y < x * x);
            return u < 0.0 ? x - Ziggurat::kR : Ziggurat::kR - x;
        }
        const double x = u * zig.x[layer];
        const double f0 = std::exp(-0.5 * (zig.x[layer] * zig.x[layer] - x * x));
        const double f1 = std::exp(-0.5 * (zig.x[layer + 1] * zig.x[layer + 1] - x * x));
        if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    }
}

}  // namespace pdcal
