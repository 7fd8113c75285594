// Serial reference path for the calibrator. Kept free of OpenMP so that the
// parallel kernels can be checked against it bit for bit.

#include <exception>
#include <vector>

#include "pdcal/calibrator.hpp"
#include "sweep_kernel.hpp"

namespace pdcal::reference {
namespace {

detail::PairStats filter_pair_serial(const BetaParams& lower, const BetaParams& upper,
                                     std::size_t n, const RngStream& base,
                                     std::uint32_t first_lane) {
    detail::PairStats total;
    for (std::size_t chunk = 0; chunk < detail::chunk_count(n); ++chunk) {
        total.merge(detail::draw_chunk(lower, upper, detail::chunk_size(n, chunk),
                                       base.substream(first_lane + static_cast<std::uint32_t>(chunk))));
    }
    return total;
}

}  // namespace

SweepResult run_sweep(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                      const RngStream& rng) {
    return detail::sweep(posterior, cfg, rng, filter_pair_serial);
}

CalibrationResult calibrate(const PortfolioPosterior& posterior, const CalibrationConfig& cfg) {
    cfg.validate();
    if (posterior.size() < 2) throw InputError("calibration needs at least 2 grades");
    std::vector<SweepResult> sweeps;
    sweeps.reserve(cfg.k_reps);
    for (std::size_t r = 0; r < cfg.k_reps; ++r) {
        try {
            sweeps.push_back(detail::sweep(posterior, cfg, RngStream(cfg.seed, r), filter_pair_serial));
        } catch (const NumericError&) {
            detail::rethrow_for_repetition(std::current_exception(), r);
        }
    }
    return detail::aggregate(posterior, cfg, sweeps);
}

}  // namespace pdcal::reference
