#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "balanced/errors.hpp"
#include "balanced/log_real.hpp"

namespace balanced {

namespace gauss {

// 16-point Gauss-Legendre rule on [-1, 1].
inline constexpr int kNodes = 16;
inline constexpr std::array<double, 16> x = {
    -9.89400934991649939e-01, -9.44575023073232600e-01, -8.65631202387831755e-01,
    -7.55404408355002999e-01, -6.17876244402643771e-01, -4.58016777657227370e-01,
    -2.81603550779258915e-01, -9.50125098376374544e-02, 9.50125098376374544e-02,
    2.81603550779258915e-01,  4.58016777657227370e-01,  6.17876244402643771e-01,
    7.55404408355002999e-01,  8.65631202387831755e-01,  9.44575023073232600e-01,
    9.89400934991649939e-01};
inline constexpr std::array<double, 16> w = {
    2.71524594117540374e-02, 6.22535239386477063e-02, 9.51585116824925914e-02,
    1.24628971255534030e-01, 1.49595988816576764e-01, 1.69156519395002619e-01,
    1.82603415044923612e-01, 1.89450610455068585e-01, 1.89450610455068585e-01,
    1.82603415044923612e-01, 1.69156519395002619e-01, 1.49595988816576764e-01,
    1.24628971255534030e-01, 9.51585116824925914e-02, 6.22535239386477063e-02,
    2.71524594117540374e-02};

} // namespace gauss

// Window description for a Laplace-concentrated log-domain integrand.
// The core window [center - half_width, center + half_width] is covered by
// Gauss-Legendre panels; beyond it, geometrically widening tail segments are
// appended on each side until a segment contributes less than abs_log_tol
// relative to the running total.
struct QuadratureSpec {
    double center = 0.0;
    double half_width = 1.0;
    int core_nodes = 128;      // >= 16; rounded to whole 16-point panels
    int tail_segments = 40;    // per side, before NonConvergentTail
    double abs_log_tol = 1e-12;

    void validate() const {
        if (!(half_width > 0.0)) throw std::invalid_argument("QuadratureSpec: half_width must be > 0");
        if (core_nodes < 16) throw std::invalid_argument("QuadratureSpec: core_nodes must be >= 16");
        if (tail_segments < 1) throw std::invalid_argument("QuadratureSpec: tail_segments must be >= 1");
    }
};

using LogIntegrand = std::function<LogReal(double)>;

namespace detail {

constexpr double kMaxPanelWidth = 8.0;  // keeps kappa * width inside GL-16 exactness
constexpr double kMaxTailWidth = 16.0;  // geometric widening saturates here

// Accumulates signed moments sum w * (t - pivot)^k * e^{g(t)} over one panel.
template <std::size_t K>
inline void panel_moments(const LogIntegrand& g, double a, double b, double pivot,
                          std::array<SignedLogAccumulator, K>& acc) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j < gauss::kNodes; ++j) {
        const double t = mid + half * gauss::x[j];
        LogReal v = g(t);
        if (v.sign == 0) continue;
        if (v.sign < 0)
            throw std::invalid_argument("integrate_logspace: integrand must be non-negative");
        const double base = v.logmag + std::log(gauss::w[j] * half);
        acc[0].add_log(base, +1);
        if constexpr (K > 1) {
            const double d = t - pivot;
            const double lad = std::log(std::abs(d));
            int s = d < 0 ? -1 : (d > 0 ? +1 : 0);
            double lp = 0.0;
            int sp = +1;
            for (std::size_t k = 1; k < K; ++k) {
                lp += lad;
                sp *= s;
                acc[k].add_log(base + lp, d == 0.0 ? 0 : sp);
            }
        }
    }
}

template <std::size_t K>
inline void panel_run(const LogIntegrand& g, double a, double b, double pivot,
                      std::array<SignedLogAccumulator, K>& acc) {
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / kMaxPanelWidth)));
    const double w = (b - a) / n;
    for (int j = 0; j < n; ++j) panel_moments<K>(g, a + j * w, a + (j + 1) * w, pivot, acc);
}

// Folds the net value of `b` into a copy of `a`.
inline SignedLogAccumulator merge(const SignedLogAccumulator& a, const SignedLogAccumulator& b) {
    SignedLogAccumulator out = a;
    out.add(b.result());
    return out;
}

// Shared walker: core panels, then adaptive tails.  Returns moments 0..K-1
// about `pivot`.
template <std::size_t K>
inline std::array<LogReal, K> integrate_moments_impl(const LogIntegrand& g,
                                                     const QuadratureSpec& spec,
                                                     double pivot) {
    spec.validate();
    std::array<SignedLogAccumulator, K> acc;

    const int n_panels = std::max(1, (spec.core_nodes + gauss::kNodes - 1) / gauss::kNodes);
    const double lo = spec.center - spec.half_width, hi = spec.center + spec.half_width;
    const double pw = (hi - lo) / n_panels;
    for (int j = 0; j < n_panels; ++j)
        panel_run<K>(g, lo + j * pw, lo + (j + 1) * pw, pivot, acc);

    // Tail extension: track only the mass (k = 0) for the stopping rule.
    for (int side = 0; side < 2; ++side) {
        double edge = side == 0 ? hi : lo;
        double width = spec.half_width;
        bool converged = false;
        for (int seg = 0; seg < spec.tail_segments; ++seg) {
            std::array<SignedLogAccumulator, K> part;
            if (side == 0)
                panel_run<K>(g, edge, edge + width, pivot, part);
            else
                panel_run<K>(g, edge - width, edge, pivot, part);
            LogReal contrib = part[0].result();
            for (std::size_t k = 0; k < K; ++k) acc[k] = merge(acc[k], part[k]);
            LogReal total = acc[0].result();
            if (contrib.sign == 0 ||
                (total.sign != 0 && contrib.logmag < total.logmag + std::log(spec.abs_log_tol))) {
                converged = true;
                break;
            }
            edge += side == 0 ? width : -width;
            width = std::min(2.0 * width, kMaxTailWidth);
        }
        if (!converged)
            throw NonConvergentTail("integrate_logspace: tail failed to converge after " +
                                    std::to_string(spec.tail_segments) +
                                    " segments (side " + std::to_string(side) + ")");
    }
    std::array<LogReal, K> out;
    for (std::size_t k = 0; k < K; ++k) out[k] = acc[k].result();
    return out;
}

} // namespace detail

// log of the integral of a non-negative Laplace-type integrand given in log
// form. Integration runs over the core window plus adaptive tails on both
// sides; a hard cutoff in the integrand (sign == 0 region) simply makes that
// side converge immediately.
inline LogReal integrate_logspace(const LogIntegrand& log_integrand, const QuadratureSpec& spec) {
    return detail::integrate_moments_impl<1>(log_integrand, spec, spec.center)[0];
}

// Signed moments \int (t - pivot)^k e^{g(t)} dt for k = 0..K-1, one pass.
template <std::size_t K>
inline std::array<LogReal, K> integrate_logspace_moments(const LogIntegrand& log_integrand,
                                                         const QuadratureSpec& spec,
                                                         double pivot) {
    return detail::integrate_moments_impl<K>(log_integrand, spec, pivot);
}

} // namespace balanced
