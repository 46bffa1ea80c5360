#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "balanced/log_real.hpp"

using namespace balanced;

TEST_CASE("LogReal round-trip") {
    const double eps = std::numeric_limits<double>::epsilon();
    // At |log v| ~ 700 a double logmag cannot hold log v to better than
    // ~0.5 ulp(700), which exponentiates to ~|log v| * eps relative error;
    // the bound below is the representation's information limit.
    for (double v : {1.0, -3.25, 0.017, 42.0, 1e-300, 4.7e250, -9.1e-200}) {
        const LogReal r = LogReal::from_real(v);
        const double bound = std::max(4.0, std::abs(r.logmag)) * eps;
        REQUIRE(std::abs(r.to_real() - v) <= bound * std::abs(v));
    }
    // moderate magnitudes meet the 4-eps round-trip directly
    for (double v : {0.5, 2.25, -7.0, 100.0, 3e-4}) {
        const LogReal r = LogReal::from_real(v);
        REQUIRE(std::abs(r.to_real() - v) <= 4 * eps * std::abs(v));
    }
    REQUIRE(LogReal::from_real(0.0).sign == 0);
    REQUIRE(LogReal::from_real(0.0).to_real() == 0.0);
}

TEST_CASE("LogReal product and quotient stay in log domain") {
    const LogReal a = LogReal::from_log(600.0);       // e^600, unrepresentable as double
    const LogReal b = LogReal::from_log(500.0, -1);
    REQUIRE((a * b).sign == -1);
    REQUIRE((a * b).logmag == Catch::Approx(1100.0));
    REQUIRE((a / b).logmag == Catch::Approx(100.0));
    REQUIRE((a / b).sign == -1);
}

TEST_CASE("log_sum_exp identity case") {
    std::vector<LogReal> terms = {LogReal::from_real(1.0), LogReal::from_real(1.0)};
    REQUIRE(log_sum_exp(terms).logmag == Catch::Approx(std::log(2.0)).margin(1e-14));
}

TEST_CASE("log_sum_exp huge-scale invariance") {
    const double l = 300.0 * std::log(10.0);
    std::vector<LogReal> terms = {LogReal::from_log(l), LogReal::from_log(l)};
    const LogReal r = log_sum_exp(terms);
    REQUIRE(std::isfinite(r.logmag));
    REQUIRE(r.logmag == Catch::Approx(l + std::log(2.0)).margin(1e-12));
}

TEST_CASE("log_sum_exp of 1/i! recovers e") {
    // oracle: sum_{i<=60} 1/i! = e to far beyond double precision
    std::vector<LogReal> terms;
    for (int i = 0; i <= 60; ++i) terms.push_back(LogReal::from_log(-std::lgamma(i + 1.0)));
    REQUIRE(log_sum_exp(terms).logmag == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("log_sum_exp empty input is exact zero") {
    REQUIRE(log_sum_exp(std::span<const LogReal>{}).sign == 0);
}

TEST_CASE("log_sum_exp dominates max and equals max + log n for equal inputs") {
    std::mt19937 rng(20240613);
    std::uniform_real_distribution<double> mag(-400.0, 400.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<LogReal> terms;
        double mx = -std::numeric_limits<double>::infinity();
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int k = 0; k < n; ++k) {
            const double l = mag(rng);
            mx = std::max(mx, l);
            terms.push_back(LogReal::from_log(l));
        }
        const double r = log_sum_exp(terms).logmag;
        REQUIRE(r >= mx);
        REQUIRE(r <= mx + std::log(static_cast<double>(n)) + 1e-12);
    }
    std::vector<LogReal> eq(7, LogReal::from_log(123.5));
    REQUIRE(log_sum_exp(eq).logmag == Catch::Approx(123.5 + std::log(7.0)).margin(1e-13));
}

TEST_CASE("signed accumulation keeps small differences") {
    // (e^10 + 1) - e^10 = 1: the +1 survives because positive and negative
    // parts are only combined once, at the end
    SignedLogAccumulator acc;
    acc.add(LogReal::from_log(10.0));
    acc.add(LogReal::from_real(1.0));
    acc.add(LogReal::from_log(10.0, -1));
    const LogReal r = acc.result();
    REQUIRE(r.sign == 1);
    REQUIRE(r.logmag == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("signed accumulation exact cancellation") {
    SignedLogAccumulator acc;
    acc.add(LogReal::from_log(3.0));
    acc.add(LogReal::from_log(3.0, -1));
    REQUIRE(acc.result().sign == 0);
}
