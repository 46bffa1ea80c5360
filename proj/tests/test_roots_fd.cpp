#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "balanced/finite_diff.hpp"
#include "balanced/roots.hpp"
#include "oracles.hpp"

using namespace balanced;

TEST_CASE("linear root") {
    const double r = find_root_monotone([](double x) { return x - 5.0; }, 0.0, 10.0, 1e-12);
    REQUIRE(r == Catch::Approx(5.0).margin(1e-11));
}

TEST_CASE("digamma root: psi(n+1) = log 100") {
    // frozen from a 30-digit computation: n = 99.499583338020570709
    auto g = [](double n) { return oracle::digamma(n + 1.0) - std::log(100.0); };
    const double r = find_root_monotone(g, 95.0, 105.0, 1e-11);
    REQUIRE(r == Catch::Approx(99.499583338020570709).margin(1e-8));
}

TEST_CASE("root independent of bracket") {
    auto g = [](double x) { return std::tanh(x - 2.0); };
    const double a = find_root_monotone(g, 1.0, 3.0, 1e-12);
    const double b = find_root_monotone(g, -50.0, 60.0, 1e-12);
    REQUIRE(std::abs(a - b) <= 1e-11);
}

TEST_CASE("invalid bracket throws") {
    REQUIRE_THROWS_AS(find_root_monotone([](double x) { return x; }, 1.0, 2.0, 1e-10),
                      BracketInvalid);
    REQUIRE_THROWS_AS(find_root_monotone([](double x) { return x; }, 2.0, 1.0, 1e-10),
                      BracketInvalid);
}

TEST_CASE("expand_bracket finds a straddle") {
    auto g = [](double x) { return x - 97.0; };
    auto [lo, hi] = expand_bracket(g, 1.0, 2.0);
    REQUIRE(lo <= 97.0);
    REQUIRE(hi >= 97.0);
    REQUIRE(find_root_monotone(g, lo, hi, 1e-10) == Catch::Approx(97.0).margin(1e-9));
}

TEST_CASE("second derivative of t^2 is exact") {
    REQUIRE(central_diff([](double t) { return t * t; }, 0.7, 2, 0.3) ==
            Catch::Approx(2.0).margin(1e-11));
}

TEST_CASE("trigamma via central_diff of lgamma") {
    // d^2/da^2 log Gamma(a+1) at a = 100 is psi'(101)
    const double fd = central_diff([](double a) { return std::lgamma(a + 1.0); }, 100.0, 2, 0.5);
    REQUIRE(fd == Catch::Approx(oracle::trigamma(101.0)).margin(1e-7));
    REQUIRE(oracle::trigamma(101.0) == Catch::Approx(0.0099501666633335714).margin(1e-14));
}

TEST_CASE("third derivative of e^t") {
    REQUIRE(central_diff([](double t) { return std::exp(t); }, 0.0, 3, 0.1) ==
            Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("fourth derivative of cos") {
    REQUIRE(central_diff([](double t) { return std::cos(t); }, 0.0, 4, 0.05) ==
            Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("stencil size is checked") {
    const double s[5] = {0, 0, 0, 0, 0};
    REQUIRE_THROWS_AS(central_diff(std::span<const double>(s, 5), 3, 0.1), std::invalid_argument);
}
