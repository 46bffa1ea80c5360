#pragma once

#include <functional>
#include <span>
#include <stdexcept>

namespace balanced {

// k-th derivative from symmetric samples: 5-point stencils for k <= 2,
// 7-point for k in {3, 4}. Truncation error is O(h^2) or better (the
// stencils used are the standard O(h^4) central ones).
//
// `samples` must hold g(x0 - m h) .. g(x0 + m h) in order, with m = 2 for a
// 5-point stencil and m = 3 for a 7-point one.
inline double central_diff(std::span<const double> samples, int order, double h) {
    if (order < 1 || order > 4) throw std::invalid_argument("central_diff: order must be 1..4");
    if (!(h > 0)) throw std::invalid_argument("central_diff: h must be > 0");
    const std::size_t need = order <= 2 ? 5 : 7;
    if (samples.size() != need)
        throw std::invalid_argument("central_diff: expected " + std::to_string(need) + " samples");
    const double* f = samples.data();
    switch (order) {
        case 1:
            return (-f[4] + 8 * f[3] - 8 * f[1] + f[0]) / (12 * h);
        case 2:
            return (-f[4] + 16 * f[3] - 30 * f[2] + 16 * f[1] - f[0]) / (12 * h * h);
        case 3:
            return (f[0] - 8 * f[1] + 13 * f[2] - 13 * f[4] + 8 * f[5] - f[6]) / (8 * h * h * h);
        default:
            return (-f[6] + 12 * f[5] - 39 * f[4] + 56 * f[3] - 39 * f[2] + 12 * f[1] - f[0]) /
                   (6 * h * h * h * h);
    }
}

// Convenience overload sampling g on the stencil around x0.
inline double central_diff(const std::function<double(double)>& g, double x0, int order, double h) {
    if (order < 1 || order > 4) throw std::invalid_argument("central_diff: order must be 1..4");
    if (order <= 2) {
        const double s[5] = {g(x0 - 2 * h), g(x0 - h), g(x0), g(x0 + h), g(x0 + 2 * h)};
        return central_diff(std::span<const double>(s, 5), order, h);
    }
    const double s[7] = {g(x0 - 3 * h), g(x0 - 2 * h), g(x0 - h), g(x0),
                         g(x0 + h),     g(x0 + 2 * h), g(x0 + 3 * h)};
    return central_diff(std::span<const double>(s, 7), order, h);
}

} // namespace balanced
