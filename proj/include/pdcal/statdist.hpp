#pragma once

#include <functional>

#include "pdcal/rng.hpp"

namespace pdcal {

/// Shape pair of a beta distribution; both shapes strictly positive.
class BetaParams {
public:
    BetaParams(double alpha, double beta);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double mean() const noexcept { return alpha_ / (alpha_ + beta_); }

    friend bool operator==(const BetaParams&, const BetaParams&) = default;

private:
    double alpha_;
    double beta_;
};

struct MeanVar {
    double mean;
    double variance;
};

/// ln Γ(x) for x > 0.
double log_gamma(double x);

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b).
double log_beta_fn(double a, double b);

MeanVar beta_mean_var(const BetaParams& p);

/// Gamma(shape, 1) variate. Marsaglia–Tsang for shape ≥ 1, boosted below.
double sample_gamma(double shape, RngStream& rng);

/// Beta variate as X / (X + Y) with X ~ Gamma(α), Y ~ Gamma(β). Always in (0, 1).
double sample_beta(const BetaParams& p, RngStream& rng);

/// Beta density.
double beta_pdf(double x, const BetaParams& p);

/// Regularized incomplete beta I_x(α, β).
double beta_cdf(double x, const BetaParams& p);

/// P(X ≤ d) for X ~ Binomial(n, θ).
double binomial_tail_le(long long n, long long d, double theta);

/// Bisection for f(x) = target on [lo, hi]; f must be monotone there.
/// Throws BracketError when target is not between f(lo) and f(hi).
double solve_monotone(const std::function<double(double)>& f, double target, double lo,
                      double hi, double tol = 1e-12);

}  // namespace pdcal
