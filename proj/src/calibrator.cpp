#include "pdcal/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pdcal/error.hpp"
#include "sweep_kernel.hpp"

namespace pdcal {

void CalibrationConfig::validate() const {
    if (n_sim < 1000) throw InputError("n_sim must be at least 1000");
    if (k_reps < 1) throw InputError("k_reps must be at least 1");
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw InputError("ci_level must lie in (0,1)");
    if (min_accepted < 100) throw InputError("min_accepted must be at least 100");
    if (max_passes < 1) throw InputError("max_passes must be at least 1");
    if (threads < 0) throw InputError("threads must be non-negative");
}

void SampleMoments::merge(const SampleMoments& other) noexcept {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count);
    const double n_b = static_cast<double>(other.count);
    const double n = n_a + n_b;
    const double delta = other.mean - mean;
    mean += delta * n_b / n;
    m2 += other.m2 + delta * delta * n_a * n_b / n;
    count += other.count;
}

BetaParams fit_beta_moments(double sample_mean, double sample_sd) {
    if (!(sample_mean > 0.0 && sample_mean < 1.0)) {
        throw VarianceTooLargeError("moment fit: sample mean " + std::to_string(sample_mean) +
                                    " outside (0,1)");
    }
    if (!(sample_sd > 0.0) || !std::isfinite(sample_sd)) {
        throw VarianceTooLargeError("moment fit: sample standard deviation must be positive");
    }
    const double variance = sample_sd * sample_sd;
    const double bound = sample_mean * (1.0 - sample_mean);
    if (variance >= bound - 1e-12) {
        throw VarianceTooLargeError("moment fit: variance " + std::to_string(variance) +
                                    " too large for mean " + std::to_string(sample_mean));
    }
    const double common = bound / variance - 1.0;
    return BetaParams(sample_mean * common, (1.0 - sample_mean) * common);
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::domain_error("empirical_quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("empirical_quantile: p outside [0,1]");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(h));
    if (below + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(below);
    return sorted[below] + frac * (sorted[below + 1] - sorted[below]);
}

namespace detail {

void rethrow_for_repetition(std::exception_ptr error, std::size_t repetition) {
    const std::string prefix = "repetition " + std::to_string(repetition) + ": ";
    try {
        std::rethrow_exception(error);
    } catch (const InsufficientAcceptanceError& e) {
        throw InsufficientAcceptanceError(prefix + e.what());
    } catch (const VarianceTooLargeError& e) {
        throw VarianceTooLargeError(prefix + e.what());
    } catch (const NonMonotoneError& e) {
        throw NonMonotoneError(prefix + e.what());
    } catch (const NumericError& e) {
        throw NumericError(prefix + e.what());
    }
}

CalibrationResult aggregate(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                            const std::vector<SweepResult>& sweeps) {
    const std::size_t m = posterior.size();
    const auto k = static_cast<double>(sweeps.size());
    const double tail = (1.0 - cfg.ci_level) / 2.0;

    CalibrationResult result;
    result.sweep_means.reserve(sweeps.size());
    for (const auto& s : sweeps) result.sweep_means.push_back(s.means);

    std::vector<double> column(sweeps.size());
    for (std::size_t g = 0; g < m; ++g) {
        GradeCalibration grade;
        grade.label = posterior[g].label;
        grade.performing = posterior[g].performing;
        grade.defaults = posterior[g].defaults;
        grade.prior_only = posterior[g].prior_only();
        double sum_mean = 0.0, sum_alpha = 0.0, sum_beta = 0.0;
        for (std::size_t r = 0; r < sweeps.size(); ++r) {
            column[r] = sweeps[r].means[g];
            sum_mean += sweeps[r].means[g];
            sum_alpha += sweeps[r].params[g].alpha();
            sum_beta += sweeps[r].params[g].beta();
        }
        grade.mean = sum_mean / k;
        grade.alpha_hat = sum_alpha / k;
        grade.beta_hat = sum_beta / k;
        std::sort(column.begin(), column.end());
        grade.median = empirical_quantile(column, 0.5);
        grade.ci_lower = empirical_quantile(column, tail);
        grade.ci_upper = empirical_quantile(column, 1.0 - tail);
        if (grade.prior_only) {
            result.warnings.push_back("grade " + grade.label +
                                      " has no observations; its posterior is the prior");
        }
        result.grades.push_back(std::move(grade));
    }

    result.pair_acceptance.assign(m - 1, 0.0);
    double passes = 0.0;
    for (const auto& s : sweeps) {
        for (std::size_t i = 0; i + 1 < m; ++i) result.pair_acceptance[i] += s.pairs[i].acceptance_rate();
        passes += static_cast<double>(s.passes);
    }
    for (auto& rate : result.pair_acceptance) rate /= k;
    result.mean_passes = passes / k;
    return result;
}

}  // namespace detail

namespace {

detail::PairStats filter_pair_parallel(const BetaParams& lower, const BetaParams& upper,
                                       std::size_t n, const RngStream& base,
                                       std::uint32_t first_lane) {
    const std::size_t chunks = detail::chunk_count(n);
    std::vector<detail::PairStats> partial(chunks);
    const auto chunks_signed = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static) if (chunks > 1 && !omp_in_parallel())
    for (long long c = 0; c < chunks_signed; ++c) {
        const auto chunk = static_cast<std::size_t>(c);
        partial[chunk] = detail::draw_chunk(lower, upper, detail::chunk_size(n, chunk),
                                            base.substream(first_lane + static_cast<std::uint32_t>(chunk)));
    }
    detail::PairStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace

SweepResult run_sweep(const PortfolioPosterior& posterior, const CalibrationConfig& cfg,
                      const RngStream& rng) {
    return detail::sweep(posterior, cfg, rng, filter_pair_parallel);
}

CalibrationResult calibrate(const PortfolioPosterior& posterior, const CalibrationConfig& cfg) {
    cfg.validate();
    if (posterior.size() < 2) throw InputError("calibration needs at least 2 grades");
    std::vector<SweepResult> sweeps(cfg.k_reps);
    std::vector<std::exception_ptr> errors(cfg.k_reps);
    const auto reps = static_cast<long long>(cfg.k_reps);
#ifdef _OPENMP
    const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long r = 0; r < reps; ++r) {
        const auto rep = static_cast<std::size_t>(r);
        try {
            sweeps[rep] = detail::sweep(posterior, cfg, RngStream(cfg.seed, rep), filter_pair_parallel);
        } catch (...) {
            errors[rep] = std::current_exception();
        }
    }
    for (std::size_t r = 0; r < cfg.k_reps; ++r) {
        if (errors[r]) detail::rethrow_for_repetition(errors[r], r);
    }
    return detail::aggregate(posterior, cfg, sweeps);
}

ConditionalMeans oracle_conditional_means_2grade(const BetaParams& p1, const BetaParams& p2,
                                                 std::size_t grid) {
    if (grid < 2000) throw std::domain_error("oracle grid must have at least 2000 points");
    const auto mv1 = beta_mean_var(p1);
    const auto mv2 = beta_mean_var(p2);
    const double sd1 = std::sqrt(mv1.variance);
    const double sd2 = std::sqrt(mv2.variance);
    const double lo = std::max(0.0, std::min(mv1.mean - 40.0 * sd1, mv2.mean - 40.0 * sd2));
    const double hi = std::min(1.0, std::max(mv1.mean + 40.0 * sd1, mv2.mean + 40.0 * sd2));
    const double h = (hi - lo) / static_cast<double>(grid - 1);

    auto density = [](double x, const BetaParams& p) {
        const double v = beta_pdf(x, p);
        return std::isfinite(v) ? v : 0.0;
    };

    // Inner integrals over θ₁ ∈ [lo, t] accumulated along the mesh, outer trapezoid over θ₂.
    double inner_mass = 0.0, inner_first = 0.0;
    double prev_f1 = 0.0, prev_t = lo;
    double z = 0.0, first = 0.0, second = 0.0;
    double prev_outer_z = 0.0, prev_outer_first = 0.0, prev_outer_second = 0.0;
    for (std::size_t j = 0; j < grid; ++j) {
        const double t = j + 1 == grid ? hi : lo + h * static_cast<double>(j);
        const double f1 = density(t, p1);
        if (j > 0) {
            inner_mass += 0.5 * (t - prev_t) * (prev_f1 + f1);
            inner_first += 0.5 * (t - prev_t) * (prev_t * prev_f1 + t * f1);
        }
        const double f2 = density(t, p2);
        const double outer_z = f2 * inner_mass;
        const double outer_first = f2 * inner_first;
        const double outer_second = t * f2 * inner_mass;
        if (j > 0) {
            const double w = 0.5 * (t - prev_t);
            z += w * (prev_outer_z + outer_z);
            first += w * (prev_outer_first + outer_first);
            second += w * (prev_outer_second + outer_second);
        }
        prev_outer_z = outer_z;
        prev_outer_first = outer_first;
        prev_outer_second = outer_second;
        prev_f1 = f1;
        prev_t = t;
    }
    if (!(z > 0.0)) throw NumericError("oracle: order constraint has zero probability on the mesh");
    return {first / z, second / z, z};
}

double Histogram::bin_lower(std::size_t i) const {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(counts.size());
}

double Histogram::bin_upper(std::size_t i) const {
    return i + 1 == counts.size() ? hi : bin_lower(i + 1);
}

std::vector<Histogram> export_histograms(const CalibrationResult& result, std::size_t bins) {
    if (bins == 0) throw std::domain_error("export_histograms: need at least one bin");
    std::vector<Histogram> histograms;
    if (result.sweep_means.empty()) return histograms;
    const std::size_t m = result.grades.size();
    for (std::size_t g = 0; g < m; ++g) {
        Histogram hist;
        hist.counts.assign(bins, 0);
        hist.lo = hist.hi = result.sweep_means.front()[g];
        for (const auto& row : result.sweep_means) {
            hist.lo = std::min(hist.lo, row[g]);
            hist.hi = std::max(hist.hi, row[g]);
        }
        const double width = (hist.hi - hist.lo) / static_cast<double>(bins);
        for (const auto& row : result.sweep_means) {
            std::size_t bin = 0;
            if (width > 0.0) {
                bin = std::min(bins - 1, static_cast<std::size_t>((row[g] - hist.lo) / width));
            }
            ++hist.counts[bin];
        }
        histograms.push_back(std::move(hist));
    }
    return histograms;
}

}  // namespace pdcal
