#include <catch2/catch_amalgamated.hpp>
#include "balanced/solver.hpp"
TEST_CASE("smoke") {
    auto m = balanced::make_exponential_model(40, 25.0);
    REQUIRE(balanced::log_f(m, 0.0) == Catch::Approx(1.0).margin(1e-9));
}
