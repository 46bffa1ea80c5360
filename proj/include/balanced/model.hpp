#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "balanced/errors.hpp"
#include "balanced/log_real.hpp"

namespace balanced {

// Coefficients are trusted through 0.6 * x_max (each M_i needs its peak
// x ~ i well inside the window). For small cutoffs the normalizing rescale
// couples the trusted edge to the cutoff tail, so the boundary-sensitive
// band x_max - 6.75 sqrt(x_max) takes over; the 0.6 rule binds for
// x_max >~ 285, which covers every production-scale model.
inline int default_trusted_degree(double x_max) {
    return static_cast<int>(std::min(0.6 * x_max, x_max - 6.75 * std::sqrt(x_max)));
}

struct ConvergenceReport {
    int iterations = 0;
    double final_sup_delta = std::numeric_limits<double>::quiet_NaN();
    double max_balance_residual = std::numeric_limits<double>::quiet_NaN();
    std::map<double, double> e1_residuals;  // s -> |lhs - rhs|
    double damping_used = 1.0;
    bool converged = false;
};

// The solved series f(x) = sum_i exp(-lambda_i) x^i together with the
// truncation window it was solved on. lambda_0 = 0 after finalization
// (normalization f(0) = 1); entries may be +inf to encode a vanishing
// coefficient (xe^x has c_0 = 0).
struct BalancedModel {
    double beta = 0.0;
    int n_trunc = 0;               // series truncated at degree N, inclusive
    double x_max = 0.0;            // integration cutoff
    int trusted_degree = 0;        // coefficients reliable for i <= trusted_degree
    std::vector<double> lambda;    // lambda_i = -log c_i, size n_trunc + 1
    ConvergenceReport report;

    int degree() const { return static_cast<int>(lambda.size()) - 1; }
};

// Cumulants of log f(e^t) in t: mean u = d/dt log f, variance u2, third
// central moment u3, and fourth cumulant u4c = m4 - 3 u2^2.
struct SeriesCumulants {
    double log_f = 0.0;
    double u = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;
    double u4c = 0.0;
    double tail_mass_beyond_trusted = 0.0;
};

namespace series {

constexpr double kPruneDrop = 45.0;  // exp(-45) ~ 3e-20: per-term cutoff under the running max

// log f(e^t) for the coefficient array; terms below max - kPruneDrop are dropped.
inline double log_f(const std::vector<double>& lambda, double t) {
    const std::size_t n = lambda.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i) * t - lambda[i];
        if (v > best) best = v;
    }
    detail::CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i) * t - lambda[i];
        if (v >= best - kPruneDrop) s.add(std::exp(v - best));
    }
    return best + std::log(s.value());
}

// Full weight-moment pass at one t. The weights w_i ~ exp(i t - lambda_i)
// are the tau_x(i) profile up to normalization; their cumulants are the
// t-derivatives of log f.
inline SeriesCumulants cumulants(const std::vector<double>& lambda, double t, int trusted_degree) {
    const std::size_t n = lambda.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i) * t - lambda[i];
        if (v > best) best = v;
    }
    detail::CompensatedSum z, zi, tail;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i) * t - lambda[i];
        if (v < best - kPruneDrop) continue;
        const double w = std::exp(v - best);
        z.add(w);
        zi.add(w * static_cast<double>(i));
        if (static_cast<int>(i) > trusted_degree) tail.add(w);
    }
    const double Z = z.value();
    const double mean = zi.value() / Z;
    detail::CompensatedSum c2, c3, c4;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i) * t - lambda[i];
        if (v < best - kPruneDrop) continue;
        const double w = std::exp(v - best);
        const double d = static_cast<double>(i) - mean;
        c2.add(w * d * d);
        c3.add(w * d * d * d);
        c4.add(w * d * d * d * d);
    }
    SeriesCumulants out;
    out.log_f = best + std::log(Z);
    out.u = mean;
    out.u2 = c2.value() / Z;
    out.u3 = c3.value() / Z;
    out.u4c = c4.value() / Z - 3.0 * out.u2 * out.u2;
    out.tail_mass_beyond_trusted = tail.value() / Z;
    return out;
}

} // namespace series

inline double log_f(const BalancedModel& m, double t) { return series::log_f(m.lambda, t); }

// d^k/dt^k log f at t, k = 0..4, computed from the discrete weights
// w_i ~ exp(i t - lambda_i).  Throws TruncationDominates when more than
// 1e-10 of the weight mass sits beyond the trusted degree.
inline SeriesCumulants u_moments(const BalancedModel& m, double t, int max_order = 4) {
    (void)max_order;
    if (std::exp(t) > m.x_max * 0.9 + 1e-12)
        throw TruncationDominates("u_moments: x beyond 0.9 * x_max");
    SeriesCumulants c = series::cumulants(m.lambda, t, m.trusted_degree);
    if (c.tail_mass_beyond_trusted > 1e-10)
        throw TruncationDominates("u_moments: weight mass beyond trusted degree = " +
                                  std::to_string(c.tail_mass_beyond_trusted));
    return c;
}

// beta = 0 closed form f = e^x: lambda_i = log i!.
inline BalancedModel make_exponential_model(int n_trunc, double x_max) {
    BalancedModel m;
    m.beta = 0.0;
    m.n_trunc = n_trunc;
    m.x_max = x_max;
    m.trusted_degree = default_trusted_degree(x_max);
    m.lambda.resize(n_trunc + 1);
    for (int i = 0; i <= n_trunc; ++i) m.lambda[i] = std::lgamma(i + 1.0);
    m.report.converged = true;
    m.report.final_sup_delta = 0.0;
    return m;
}

// Explicit xe^x profile (the beta -> 1 endpoint): c_0 = 0, c_i = 1/(i-1)!.
inline BalancedModel make_x_exp_model(int n_trunc, double x_max) {
    BalancedModel m;
    m.beta = 1.0;
    m.n_trunc = n_trunc;
    m.x_max = x_max;
    m.trusted_degree = default_trusted_degree(x_max);
    m.lambda.resize(n_trunc + 1);
    m.lambda[0] = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n_trunc; ++i) m.lambda[i] = std::lgamma(static_cast<double>(i));
    m.report.converged = true;
    m.report.final_sup_delta = 0.0;
    return m;
}

} // namespace balanced
