#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "balanced/errors.hpp"

namespace balanced {

// Root of a strictly increasing g on [lo, hi] with g(lo) <= 0 <= g(hi).
// Safeguarded secant: a secant proposal is taken when it lands inside the
// current bracket, otherwise bisection; termination is guaranteed because
// the bracket at least halves every other step.
inline double find_root_monotone(const std::function<double(double)>& g,
                                 double lo, double hi, double tol) {
    if (!(lo < hi)) throw BracketInvalid("find_root_monotone: empty bracket");
    double flo = g(lo), fhi = g(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo > 0.0 || fhi < 0.0)
        throw BracketInvalid("find_root_monotone: g(lo), g(hi) do not straddle zero (g(lo)=" +
                             std::to_string(flo) + ", g(hi)=" + std::to_string(fhi) + ")");
    bool last_was_bisect = false;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid;
        if (!last_was_bisect && fhi != flo) {
            mid = lo - flo * (hi - lo) / (fhi - flo);
            const double margin = 0.01 * (hi - lo);
            if (!(mid > lo + margin && mid < hi - margin)) {
                mid = 0.5 * (lo + hi);
                last_was_bisect = true;
            } else {
                last_was_bisect = false;
            }
        } else {
            mid = 0.5 * (lo + hi);
            last_was_bisect = false;
        }
        const double fm = g(mid);
        if (fm == 0.0) return mid;
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// Widens [lo, hi] geometrically around its midpoint until g changes sign.
inline std::pair<double, double> expand_bracket(const std::function<double(double)>& g,
                                                double lo, double hi, int max_doublings = 60) {
    double flo = g(lo), fhi = g(hi);
    for (int it = 0; it < max_doublings; ++it) {
        if (flo <= 0.0 && fhi >= 0.0) return {lo, hi};
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        lo = mid - 2.0 * half;
        hi = mid + 2.0 * half;
        flo = g(lo);
        fhi = g(hi);
    }
    throw BracketInvalid("expand_bracket: no sign change found");
}

} // namespace balanced
