#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pdcal/error.hpp"
#include "pdcal/statdist.hpp"

using namespace pdcal;

namespace {

// Independent oracles: long-double libm and direct summation.
double lgamma_oracle(double x) { return static_cast<double>(std::lgammal(static_cast<long double>(x))); }

double binomial_pmf_sum(long long n, long long lo, long long hi, double theta) {
    long double total = 0.0L;
    for (long long k = lo; k <= hi; ++k) {
        const long double log_pmf = std::lgammal(n + 1.0L) - std::lgammal(k + 1.0L) -
                                    std::lgammal(n - k + 1.0L) + k * std::log(static_cast<long double>(theta)) +
                                    (n - k) * std::log1p(-static_cast<long double>(theta));
        total += std::exp(log_pmf);
    }
    return static_cast<double>(total);
}

double trapezoid_beta_cdf(double x, const BetaParams& p, long long points) {
    const double h = x / static_cast<double>(points - 1);
    double sum = 0.5 * (beta_pdf(0.0, p) + beta_pdf(x, p));
    for (long long i = 1; i + 1 < points; ++i) sum += beta_pdf(h * static_cast<double>(i), p);
    return sum * h;
}

}  // namespace

TEST_CASE("log_gamma examples") {
    CHECK(std::fabs(log_gamma(1.0)) <= 1e-12);
    CHECK(std::fabs(log_gamma(2.0)) <= 1e-12);
    CHECK(std::fabs(log_gamma(5.0) - std::log(24.0)) <= 1e-12);
    CHECK(std::fabs(log_gamma(5.0) - 3.178053830347945) <= 1e-12);
    CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("log_gamma matches frozen high-precision values") {
    // mpmath.loggamma at 30 digits
    CHECK(std::fabs(log_gamma(1e-3) - 6.90717888538385366) <= 1e-12);
    CHECK(std::fabs(log_gamma(0.5) - 0.572364942924700087) <= 1e-12);
    CHECK(std::fabs(log_gamma(1.5) + 0.120782237635245222) <= 1e-12);
    CHECK(std::fabs(log_gamma(2.5) - 0.284682870472919160) <= 1e-12);
    CHECK(std::fabs(log_gamma(10.0) - 12.8018274800814696) <= 1e-12);
    CHECK(std::fabs(log_gamma(100.5) - 361.435540467777622) / 361.4 <= 1e-14);
    CHECK(std::fabs(log_gamma(1e6) - 12815504.569147611660) / 12815504.57 <= 1e-14);
}

TEST_CASE("log_gamma against long-double oracle across [1e-3, 1e6]") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> exponent(-3.0, 6.0);
    for (int i = 0; i < 20000; ++i) {
        const double x = std::pow(10.0, exponent(gen));
        const double expected = lgamma_oracle(x);
        const double err = std::fabs(log_gamma(x) - expected);
        // Absolute 1e-12 where representable; relative 1e-14 for large values.
        REQUIRE(err <= std::max(1e-12, 1e-14 * std::fabs(expected)));
    }
}

TEST_CASE("log_gamma recurrence over [0.5, 100]") {
    for (double x = 0.5; x <= 100.0; x += 0.0173) {
        REQUIRE(std::fabs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)) <=
                1e-10 * std::max(1.0, std::fabs(log_gamma(x + 1.0))));
    }
}

TEST_CASE("beta_mean_var examples") {
    auto mv = beta_mean_var({1, 1});
    CHECK(mv.mean == doctest::Approx(0.5));
    CHECK(mv.variance == doctest::Approx(1.0 / 12.0));
    mv = beta_mean_var({3, 12});
    CHECK(mv.mean == doctest::Approx(0.2));
    CHECK(mv.variance == doctest::Approx(0.01));
    mv = beta_mean_var({61, 1411});
    CHECK(mv.mean == doctest::Approx(0.041440217391304345).epsilon(1e-12));
    CHECK(mv.variance == doctest::Approx(2.696736305082538e-05).epsilon(1e-10));
}

TEST_CASE("BetaParams rejects non-positive shapes") {
    CHECK_THROWS_AS(BetaParams(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(BetaParams(1.0, -2.0), std::domain_error);
    CHECK_THROWS_AS(BetaParams(NAN, 1.0), std::domain_error);
}

TEST_CASE("sample_beta moments") {
    constexpr int n = 1000000;
    SUBCASE("uniform") {
        RngStream rng(1, 0);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_beta({1, 1}, rng);
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
            sum += x;
        }
        CHECK(std::fabs(sum / n - 0.5) < 0.002);
    }
    SUBCASE("2016 BB posterior") {
        RngStream rng(7, 3);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += sample_beta({61, 1411}, rng);
        const double se = std::sqrt(2.696736305082538e-05 / n);
        CHECK(std::fabs(sum / n - 0.041440217391304345) < 4 * se);
    }
    SUBCASE("arcsine shapes below one") {
        RngStream rng(8, 1);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sample_beta({0.5, 0.5}, rng);
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
            sum += x;
        }
        const double se = std::sqrt(0.125 / n);
        CHECK(std::fabs(sum / n - 0.5) < 4 * se);
    }
    SUBCASE("tiny shape stays inside the open interval") {
        RngStream rng(9, 1);
        for (int i = 0; i < 10000; ++i) {
            const double x = sample_beta({0.01, 50}, rng);
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
        }
    }
}

TEST_CASE("sample_beta is reproducible for a fixed stream") {
    RngStream a(42, 9), b(42, 9);
    for (int i = 0; i < 10000; ++i) REQUIRE(sample_beta({61, 1411}, a) == sample_beta({61, 1411}, b));
}

TEST_CASE("beta_cdf examples") {
    CHECK(beta_cdf(0.0, {3, 12}) == 0.0);
    CHECK(beta_cdf(1.0, {3, 12}) == 1.0);
    CHECK(beta_cdf(0.5, {1, 1}) == doctest::Approx(0.5).epsilon(1e-12));
    const double trapezoid = trapezoid_beta_cdf(0.2, {3, 12}, 10000001);
    CHECK(std::fabs(beta_cdf(0.2, {3, 12}) - trapezoid) < 1e-6);
    // mpmath.betainc(3, 12, 0, 0.2, regularized=True)
    CHECK(std::fabs(beta_cdf(0.2, {3, 12}) - 0.55194901168128) < 1e-10);
    CHECK_THROWS_AS(beta_cdf(-0.1, {1, 1}), std::domain_error);
    CHECK_THROWS_AS(beta_cdf(1.1, {1, 1}), std::domain_error);
}

TEST_CASE("beta_cdf agrees with direct binomial sums for integer shapes") {
    // I_x(a, b) = P(Binomial(a+b-1, x) >= a)
    for (int a = 1; a <= 30; a += 3) {
        for (int b = 1; b <= 40; b += 5) {
            for (double x : {0.01, 0.1, 0.37, 0.5, 0.8, 0.99}) {
                const double expected = binomial_pmf_sum(a + b - 1, a, a + b - 1, x);
                REQUIRE(std::fabs(beta_cdf(x, {double(a), double(b)}) - expected) < 1e-10);
            }
        }
    }
}

TEST_CASE("beta_cdf is nondecreasing in x") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> log_shape(std::log(0.2), std::log(3000.0));
    std::vector<double> xs(100);
    for (int trial = 0; trial < 1000; ++trial) {
        const BetaParams p(std::exp(log_shape(gen)), std::exp(log_shape(gen)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& x : xs) x = unit(gen);
        std::sort(xs.begin(), xs.end());
        double previous = 0.0;
        for (double x : xs) {
            const double value = beta_cdf(x, p);
            REQUIRE(value >= previous);
            REQUIRE(value <= 1.0);
            previous = value;
        }
    }
}

TEST_CASE("sample_beta passes Kolmogorov-Smirnov against beta_cdf") {
    constexpr int n = 100000;
    // Asymptotic critical value at significance 0.001: sqrt(-ln(0.0005)/2)/sqrt(n).
    const double critical = std::sqrt(-std::log(0.0005) / 2.0) / std::sqrt(double(n));
    std::mt19937_64 gen(314);
    std::uniform_real_distribution<double> log_shape(std::log(0.3), std::log(2000.0));
    std::vector<double> draws(n);
    for (int trial = 0; trial < 20; ++trial) {
        const BetaParams p(std::exp(log_shape(gen)), std::exp(log_shape(gen)));
        RngStream rng(1000 + trial, trial);
        for (auto& x : draws) x = sample_beta(p, rng);
        std::sort(draws.begin(), draws.end());
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            const double f = beta_cdf(draws[i], p);
            d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
        }
        CAPTURE(p.alpha());
        CAPTURE(p.beta());
        CHECK(d < critical);
    }
}

TEST_CASE("binomial_tail_le examples and errors") {
    CHECK(binomial_tail_le(29, 29, 0.5) == 1.0);
    CHECK(binomial_tail_le(1, 0, 0.3) == doctest::Approx(0.7).epsilon(1e-12));
    const double closed = std::pow(1 - 0.09, 28) * (1 + 28 * 0.09);
    CHECK(std::fabs(binomial_tail_le(29, 1, 0.09) - closed) < 1e-10);
    CHECK(std::fabs(binomial_tail_le(29, 1, 0.09) - 0.25101614088962476) < 1e-10);
    CHECK_THROWS_AS(binomial_tail_le(5, 6, 0.5), std::domain_error);
    CHECK_THROWS_AS(binomial_tail_le(5, 2, 0.0), std::domain_error);
    CHECK_THROWS_AS(binomial_tail_le(5, 2, 1.0), std::domain_error);
}

TEST_CASE("binomial tail complements sum to one and match direct sums") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 500; ++trial) {
        const long long n = std::uniform_int_distribution<long long>(1, 400)(gen);
        const long long d = std::uniform_int_distribution<long long>(0, n - 1)(gen);
        const double theta = std::uniform_real_distribution<double>(0.001, 0.999)(gen);
        const double le = binomial_tail_le(n, d, theta);
        const double ge = beta_cdf(theta, {double(d + 1), double(n - d)});
        REQUIRE(std::fabs(le + ge - 1.0) < 1e-9);
        REQUIRE(std::fabs(le - binomial_pmf_sum(n, 0, d, theta)) < 1e-10);
    }
}

TEST_CASE("solve_monotone examples") {
    CHECK(solve_monotone([](double x) { return x; }, 0.25, 0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    const double root = solve_monotone([](double x) { return std::pow(1 - x, 100); }, 0.25, 0.0, 1.0);
    CHECK(std::fabs(root - (1 - std::pow(0.25, 0.01))) < 1e-10);
    CHECK(std::fabs(root - 0.013767295506640798) < 1e-10);
    const double pt = solve_monotone(
        [](double x) { return x <= 0 ? 1.0 : x >= 1 ? 0.0 : binomial_tail_le(29, 1, x); }, 0.25, 0.0, 1.0);
    CHECK(std::fabs(pt - 0.09017772732802283) < 1e-9);
    CHECK_THROWS_AS(solve_monotone([](double x) { return x; }, 2.0, 0.0, 1.0), BracketError);
}
