#pragma once

// Test-only oracles, independent of the library code paths they check.

#include <cmath>

namespace oracle {

// Polygamma via recurrence shift to x >= 12 plus the asymptotic series.
inline double digamma(double x) {
    double acc = 0.0;
    while (x < 12.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double r = 1.0 / x, r2 = r * r;
    return acc + std::log(x) - 0.5 * r -
           r2 * (1.0 / 12 - r2 * (1.0 / 120 - r2 * (1.0 / 252 - r2 / 240)));
}

inline double trigamma(double x) {
    double acc = 0.0;
    while (x < 12.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double r = 1.0 / x, r2 = r * r;
    return acc + r + 0.5 * r2 +
           r * r2 * (1.0 / 6 - r2 * (1.0 / 30 - r2 * (1.0 / 42 - r2 / 30)));
}

inline double tetragamma(double x) {  // psi''
    double acc = 0.0;
    while (x < 12.0) {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    const double r = 1.0 / x, r2 = r * r;
    return acc - r2 - r * r2 - 0.5 * r2 * r2 + r2 * r2 * r2 * (1.0 / 6) -
           r2 * r2 * r2 * r2 * (1.0 / 6);
}

} // namespace oracle
