#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "balanced/quadrature.hpp"

using namespace balanced;

namespace {

LogIntegrand gaussian_at(double c) {
    return [c](double t) { return LogReal::from_log(-0.5 * (t - c) * (t - c)); };
}

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

} // namespace

TEST_CASE("gaussian integral in log space") {
    QuadratureSpec spec;
    spec.center = 3.0;
    spec.half_width = 9.0;
    spec.core_nodes = 160;
    const LogReal r = integrate_logspace(gaussian_at(3.0), spec);
    REQUIRE(r.logmag == Catch::Approx(kLogSqrt2Pi).margin(1e-10));
}

TEST_CASE("factorial via t-substitution") {
    // int_0^inf x^10 e^{-x} dx = 10!; integrand e^{11 t - e^t} after t = log x
    LogIntegrand g = [](double t) { return LogReal::from_log(11.0 * t - std::exp(t)); };
    QuadratureSpec spec;
    spec.center = std::log(10.0);
    spec.half_width = 4.0;
    spec.core_nodes = 320;
    const LogReal r = integrate_logspace(g, spec);
    REQUIRE(r.logmag == Catch::Approx(std::log(3628800.0)).margin(1e-8));
}

TEST_CASE("unit exponential integral") {
    LogIntegrand g = [](double t) { return LogReal::from_log(t - std::exp(t)); };
    QuadratureSpec spec;
    spec.center = 0.0;
    spec.half_width = 4.0;
    spec.core_nodes = 160;
    REQUIRE(integrate_logspace(g, spec).logmag == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("result invariant under doubling core_nodes") {
    QuadratureSpec spec;
    spec.center = -1.0;
    spec.half_width = 10.0;
    spec.core_nodes = 160;
    const double a = integrate_logspace(gaussian_at(-1.0), spec).logmag;
    spec.core_nodes *= 2;
    const double b = integrate_logspace(gaussian_at(-1.0), spec).logmag;
    REQUIRE(std::abs(a - b) <= 1e-9);
}

TEST_CASE("result invariant under widening the window by 50%") {
    QuadratureSpec spec;
    spec.center = 2.0;
    spec.half_width = 8.0;
    spec.core_nodes = 160;
    spec.abs_log_tol = 1e-12;
    const double a = integrate_logspace(gaussian_at(2.0), spec).logmag;
    spec.half_width *= 1.5;
    spec.core_nodes = 240;
    const double b = integrate_logspace(gaussian_at(2.0), spec).logmag;
    REQUIRE(std::abs(a - b) < spec.abs_log_tol * 100);
}

TEST_CASE("hard cutoff makes one side converge immediately") {
    LogIntegrand g = [](double t) -> LogReal {
        if (t > 0.0) return LogReal::zero();
        return LogReal::from_log(t);   // e^t on (-inf, 0], integral = 1
    };
    QuadratureSpec spec;
    spec.center = -2.0;
    spec.half_width = 2.0;
    spec.core_nodes = 64;
    REQUIRE(integrate_logspace(g, spec).logmag == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("non-concentrated integrand raises NonConvergentTail") {
    LogIntegrand flat = [](double) { return LogReal::from_log(0.0); };
    QuadratureSpec spec;
    spec.center = 0.0;
    spec.half_width = 1.0;
    spec.core_nodes = 16;
    spec.tail_segments = 8;
    REQUIRE_THROWS_AS(integrate_logspace(flat, spec), NonConvergentTail);
}

TEST_CASE("spec validation") {
    QuadratureSpec spec;
    spec.half_width = -1.0;
    REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.half_width = 1.0;
    spec.core_nodes = 8;
    REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("moment pass matches closed-form gaussian moments") {
    QuadratureSpec spec;
    spec.center = 1.5;
    spec.half_width = 10.0;
    spec.core_nodes = 240;
    const auto m = integrate_logspace_moments<4>(gaussian_at(1.5), spec, 1.5);
    REQUIRE(m[0].logmag == Catch::Approx(kLogSqrt2Pi).margin(1e-10));
    REQUIRE(m[1].to_real() == Catch::Approx(0.0).margin(1e-12));          // odd moment
    REQUIRE((m[2] / m[0]).to_real() == Catch::Approx(1.0).margin(1e-10)); // variance
    REQUIRE(m[3].to_real() == Catch::Approx(0.0).margin(1e-11));
}

TEST_CASE("moment pass with off-center pivot") {
    // E[(t - pivot)] = mean - pivot for a Gaussian at 0.75
    QuadratureSpec spec;
    spec.center = 0.75;
    spec.half_width = 10.0;
    spec.core_nodes = 240;
    const auto m = integrate_logspace_moments<2>(gaussian_at(0.75), spec, 0.25);
    REQUIRE((m[1] / m[0]).to_real() == Catch::Approx(0.5).margin(1e-10));
}
