#include "pdcal/statdist.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pdcal/error.hpp"

namespace pdcal {

BetaParams::BetaParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::domain_error("BetaParams: shapes must be finite and positive, got (" +
                                std::to_string(alpha) + ", " + std::to_string(beta) + ")");
    }
}

namespace {

// Asymptotic series for ln Γ(z), accurate to ~1e-17 once z ≥ 10.
double stirling_log_gamma(double z) {
    const double inv = 1.0 / z;
    const double inv2 = inv * inv;
    double series = -3617.0 / 122400.0;
    series = series * inv2 + 1.0 / 156.0;
    series = series * inv2 - 691.0 / 360360.0;
    series = series * inv2 + 1.0 / 1188.0;
    series = series * inv2 - 1.0 / 1680.0;
    series = series * inv2 + 1.0 / 1260.0;
    series = series * inv2 - 1.0 / 360.0;
    series = series * inv2 + 1.0 / 12.0;
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series * inv;
}

// Continued fraction for the incomplete beta (modified Lentz).
double incomplete_beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    constexpr int kMaxIter = 100000;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

// ln of a Gamma(shape) variate for shape < 1, kept in log space to avoid underflow.
double log_sample_gamma_small(double shape, RngStream& rng) {
    return std::log(sample_gamma(shape + 1.0, rng)) + std::log(rng.uniform()) / shape;
}

double marsaglia_tsang(double shape, RngStream& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0) || std::isinf(x)) {
        throw std::domain_error("log_gamma: argument must be positive and finite");
    }
    if (x == 1.0 || x == 2.0) return 0.0;
    if (x >= 10.0) return stirling_log_gamma(x);
    double product = 1.0;
    double z = x;
    while (z < 10.0) {
        product *= z;
        z += 1.0;
    }
    return stirling_log_gamma(z) - std::log(product);
}

double log_beta_fn(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

MeanVar beta_mean_var(const BetaParams& p) {
    const double a = p.alpha();
    const double b = p.beta();
    const double s = a + b;
    return {a / s, a * b / (s * s * (s + 1.0))};
}

double sample_gamma(double shape, RngStream& rng) {
    if (!(shape > 0.0)) throw std::domain_error("sample_gamma: shape must be positive");
    if (shape >= 1.0) return marsaglia_tsang(shape, rng);
    return std::exp(log_sample_gamma_small(shape, rng));
}

double sample_beta(const BetaParams& p, RngStream& rng) {
    double value;
    if (p.alpha() >= 1.0 && p.beta() >= 1.0) {
        const double x = marsaglia_tsang(p.alpha(), rng);
        const double y = marsaglia_tsang(p.beta(), rng);
        value = x / (x + y);
    } else {
        const double lx = p.alpha() >= 1.0 ? std::log(marsaglia_tsang(p.alpha(), rng))
                                           : log_sample_gamma_small(p.alpha(), rng);
        const double ly = p.beta() >= 1.0 ? std::log(marsaglia_tsang(p.beta(), rng))
                                           : log_sample_gamma_small(p.beta(), rng);
        value = 1.0 / (1.0 + std::exp(ly - lx));
    }
    return std::clamp(value, DBL_MIN, 1.0 - DBL_EPSILON / 2.0);
}

double beta_pdf(double x, const BetaParams& p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_pdf: x outside [0,1]");
    const double a = p.alpha();
    const double b = p.beta();
    if (x == 0.0) {
        if (a < 1.0) return HUGE_VAL;
        return a == 1.0 ? std::exp(-log_beta_fn(a, b)) : 0.0;
    }
    if (x == 1.0) {
        if (b < 1.0) return HUGE_VAL;
        return b == 1.0 ? std::exp(-log_beta_fn(a, b)) : 0.0;
    }
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b));
}

double beta_cdf(double x, const BetaParams& p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_cdf: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double a = p.alpha();
    const double b = p.beta();
    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::clamp(std::exp(log_front) * incomplete_beta_cf(a, b, x) / a, 0.0, 1.0);
    }
    return std::clamp(1.0 - std::exp(log_front) * incomplete_beta_cf(b, a, 1.0 - x) / b, 0.0,
                      1.0);
}

double binomial_tail_le(long long n, long long d, double theta) {
    if (n < 0 || d < 0 || d > n) {
        throw std::domain_error("binomial_tail_le: need 0 <= d <= n");
    }
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::domain_error("binomial_tail_le: theta must lie in (0,1)");
    }
    if (d == n) return 1.0;
    // P(X <= d) = I_{1-θ}(n - d, d + 1)
    return beta_cdf(1.0 - theta, BetaParams(static_cast<double>(n - d), static_cast<double>(d + 1)));
}

double solve_monotone(const std::function<double(double)>& f, double target, double lo, double hi,
                      double tol) {
    if (!(lo < hi)) throw BracketError("solve_monotone: empty interval");
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    const bool increasing = f_hi >= f_lo;
    if (target < std::min(f_lo, f_hi) || target > std::max(f_lo, f_hi)) {
        throw BracketError("solve_monotone: target " + std::to_string(target) +
                           " not enclosed by [" + std::to_string(f_lo) + ", " +
                           std::to_string(f_hi) + "]");
    }
    if (f_lo == target) return lo;
    if (f_hi == target) return hi;
    for (int iter = 0; iter < 2000 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double value = f(mid);
        if (value == target) return mid;
        if ((value < target) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace pdcal
