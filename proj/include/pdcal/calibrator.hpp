#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pdcal/posterior.hpp"
#include "pdcal/rng.hpp"
#include "pdcal/statdist.hpp"

namespace pdcal {

enum class SweepDirection { ascending, descending };

struct CalibrationConfig {
    std::size_t n_sim = 100000;            // simulated values per grade per pair step
    std::size_t k_reps = 300;              // independent sweeps
    std::uint64_t seed = 42;
    double ci_level = 0.90;
    std::size_t min_accepted = 100;        // fewest filtered pairs a refit may use
    std::size_t max_resample_rounds = 10;  // top-up blocks of n_sim before giving up
    std::size_t max_passes = 20;           // full passes allowed to reach ordered means
    SweepDirection direction = SweepDirection::ascending;
    int threads = 0;                       // 0 = runtime default; never changes results

    /// InputError when a field is out of range.
    void validate() const;
};

/// Count, mean and centred second moment; mergeable (Chan et al.).
struct SampleMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    void merge(const SampleMoments& other) noexcept;
    /// Divides by N, matching the plain moment estimator.
    double population_variance() const noexcept {
        return count ? m2 / static_cast<double>(count) : 0.0;
    }
};

/// Method-of-moments beta fit. Throws VarianceTooLargeError when
/// sd² ≥ mean·(1 − mean) − 1e-12, i.e. when no beta has these moments.
BetaParams fit_beta_moments(double sample_mean, double sample_sd);

struct PairDiagnostics {
    std::size_t drawn = 0;
    std::size_t accepted = 0;
    double acceptance_rate() const noexcept {
        return drawn ? static_cast<double>(accepted) / static_cast<double>(drawn) : 0.0;
    }
};

struct SweepResult {
    std::vector<BetaParams> params;        // fitted shapes per grade
    std::vector<double> means;             // α̂ / (α̂ + β̂) per grade
    std::vector<PairDiagnostics> pairs;    // pair (i, i+1), summed over passes
    std::size_t passes = 0;
};

/// One simulate/filter/refit sweep starting from the posteriors.
///
/// Adjacent pairs are visited in `cfg.direction` order. For each pair both
/// current distributions are sampled n_sim times, index-aligned draws with
/// θᵢ ≤ θᵢ₊₁ are kept, and both grades are refit from the kept values; the
/// refit distributions are what later pairs sample from. Passes repeat until
/// the fitted means are nondecreasing or `cfg.max_passes` is exhausted
/// (NonMonotoneError). Only the seed and stream id of `rng` are used; draws
/// are taken from its lanes, so the result does not depend on thread count.
SweepResult run_sweep(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                      const RngStream& rng);

struct GradeCalibration {
    std::string label;
    long long performing = 0;
    long long defaults = 0;
    double mean = 0.0;        // mean of the K sweep means
    double median = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double alpha_hat = 0.0;   // α̂ averaged over repetitions
    double beta_hat = 0.0;
    bool prior_only = false;
};

struct CalibrationResult {
    std::vector<GradeCalibration> grades;
    std::vector<double> pair_acceptance;            // mean acceptance rate per pair
    double mean_passes = 0.0;
    std::vector<std::vector<double>> sweep_means;   // [repetition][grade]
    std::vector<std::string> warnings;
};

/// K independent sweeps, repetition r on stream (seed, r), run in parallel.
CalibrationResult calibrate(const PortfolioPosterior& posterior, const CalibrationConfig& cfg);

/// Serial implementations of the same algorithm; bit-identical to the parallel ones.
namespace reference {
SweepResult run_sweep(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                      const RngStream& rng);
CalibrationResult calibrate(const PortfolioPosterior& posterior, const CalibrationConfig& cfg);
}  // namespace reference

/// Linear interpolation between order statistics (R type 7); `sorted` ascending.
double empirical_quantile(const std::vector<double>& sorted, double p);

struct ConditionalMeans {
    double mean1;        // E[θ₁ | θ₁ ≤ θ₂]
    double mean2;        // E[θ₂ | θ₁ ≤ θ₂]
    double probability;  // P(θ₁ ≤ θ₂)
};

/// Trapezoid quadrature of the two-grade order-constrained means on a
/// `grid`-point mesh (grid ≥ 2000). The mesh covers both densities out to
/// 40 standard deviations. Meant for shapes ≥ 1.
ConditionalMeans oracle_conditional_means_2grade(const BetaParams& p1, const BetaParams& p2,
                                                 std::size_t grid = 4000);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
    double bin_lower(std::size_t i) const;
    double bin_upper(std::size_t i) const;
};

/// Per grade, fixed-width bins spanning the min..max of that grade's sweep means.
std::vector<Histogram> export_histograms(const CalibrationResult& result, std::size_t bins = 30);

}  // namespace pdcal
