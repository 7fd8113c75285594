#pragma once

// Pieces shared by the OpenMP and serial reference calibrators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "pdcal/calibrator.hpp"
#include "pdcal/error.hpp"

namespace pdcal::detail {

/// Draws per RNG lane. Fixed so that the lane layout never depends on threads.
inline constexpr std::size_t kChunkPairs = 8192;

struct PairStats {
    PairDiagnostics diag;
    SampleMoments lower;
    SampleMoments upper;

    void merge(const PairStats& other) noexcept {
        diag.drawn += other.diag.drawn;
        diag.accepted += other.diag.accepted;
        lower.merge(other.lower);
        upper.merge(other.upper);
    }
};

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkPairs - 1) / kChunkPairs; }

inline std::size_t chunk_size(std::size_t n, std::size_t chunk) {
    return std::min(kChunkPairs, n - chunk * kChunkPairs);
}

/// `count` index-aligned draws from both distributions, keeping lower ≤ upper.
inline PairStats draw_chunk(const BetaParams& lower, const BetaParams& upper, std::size_t count,
                            RngStream rng) {
    PairStats stats;
    stats.diag.drawn = count;
    for (std::size_t j = 0; j < count; ++j) {
        const double a = sample_beta(lower, rng);
        const double b = sample_beta(upper, rng);
        if (a <= b) {
            stats.lower.add(a);
            stats.upper.add(b);
        }
    }
    stats.diag.accepted = stats.lower.count;
    return stats;
}

/// Hands out consecutive lanes of one stream.
class LaneAllocator {
public:
    std::uint32_t take(std::size_t count) {
        if (count > std::numeric_limits<std::uint32_t>::max() - next_) {
            throw NumericError("sweep exhausted the 2^32 RNG lanes of its stream");
        }
        const std::uint32_t first = next_;
        next_ += static_cast<std::uint32_t>(count);
        return first;
    }

private:
    std::uint32_t next_ = 0;
};

/// Sweep driver. `filter(lower, upper, n, base, first_lane)` returns the merged
/// PairStats of chunk_count(n) chunks, chunk c drawn from lane first_lane + c.
template <class BlockFilter>
SweepResult sweep(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                  const RngStream& rng, BlockFilter&& filter) {
    cfg.validate();
    const std::size_t m = posterior.size();
    if (m < 2) throw InputError("calibration needs at least 2 grades");

    std::vector<BetaParams> current;
    current.reserve(m);
    for (const auto& g : posterior) current.push_back(g.params);

    SweepResult result;
    result.pairs.assign(m - 1, {});
    const RngStream base(rng.seed(), rng.stream_id());
    LaneAllocator lanes;

    for (std::size_t pass = 1; pass <= cfg.max_passes; ++pass) {
        for (std::size_t step = 0; step + 1 < m; ++step) {
            const std::size_t i = cfg.direction == SweepDirection::ascending ? step : m - 2 - step;
            const std::size_t blocks = chunk_count(cfg.n_sim);
            PairStats stats = filter(current[i], current[i + 1], cfg.n_sim, base, lanes.take(blocks));
            for (std::size_t round = 0;
                 stats.diag.accepted < cfg.min_accepted && round < cfg.max_resample_rounds; ++round) {
                stats.merge(filter(current[i], current[i + 1], cfg.n_sim, base, lanes.take(blocks)));
            }
            result.pairs[i].drawn += stats.diag.drawn;
            result.pairs[i].accepted += stats.diag.accepted;
            if (stats.diag.accepted < cfg.min_accepted) {
                throw InsufficientAcceptanceError(
                    "pair (" + posterior[i].label + ", " + posterior[i + 1].label + "), pass " +
                    std::to_string(pass) + ": only " + std::to_string(stats.diag.accepted) +
                    " of " + std::to_string(stats.diag.drawn) +
                    " simulated pairs satisfy the order constraint (minimum " +
                    std::to_string(cfg.min_accepted) + ")");
            }
            try {
                current[i] = fit_beta_moments(stats.lower.mean,
                                              std::sqrt(stats.lower.population_variance()));
                current[i + 1] = fit_beta_moments(stats.upper.mean,
                                                  std::sqrt(stats.upper.population_variance()));
            } catch (const VarianceTooLargeError& e) {
                throw VarianceTooLargeError("pair (" + posterior[i].label + ", " +
                                            posterior[i + 1].label + "): " + e.what());
            }
        }
        result.passes = pass;
        bool ordered = true;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            if (current[i].mean() > current[i + 1].mean()) ordered = false;
        }
        if (ordered) {
            result.params = current;
            for (const auto& p : current) result.means.push_back(p.mean());
            return result;
        }
    }
    throw NonMonotoneError("calibrated means still out of order after " +
                           std::to_string(cfg.max_passes) + " passes");
}

/// Rethrows a repetition's failure with the repetition index prefixed, keeping its type.
[[noreturn]] void rethrow_for_repetition(std::exception_ptr error, std::size_t repetition);

CalibrationResult aggregate(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                            const std::vector<SweepResult>& sweeps);

}  // namespace pdcal::detail
