#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>

namespace balanced {

// A real carried as (sign, log of absolute value). Everything the solver
// touches -- series coefficients, moment integrals, concentration profiles --
// spans thousands of orders of magnitude, so raw doubles are only ever used
// after a shift against a running maximum.
struct LogReal {
    int sign = 0;           // -1, 0, +1; 0 means exactly zero
    double logmag = -std::numeric_limits<double>::infinity();  // ignored when sign == 0

    static LogReal zero() { return {}; }

    static LogReal from_log(double lm, int s = +1) {
        if (s == 0) return {};
        return {s < 0 ? -1 : +1, lm};
    }

    static LogReal from_real(double v) {
        if (v == 0.0) return {};
        return {v < 0 ? -1 : +1, std::log(std::abs(v))};
    }

    double to_real() const {
        if (sign == 0) return 0.0;
        // split exp(logmag) = 2^k exp(r) with |r| < 0.35 so the reduction,
        // not exp itself, carries the magnitude
        constexpr double kLn2Hi = 6.93147180369123816490e-01;
        constexpr double kLn2Lo = 1.90821492927058770002e-10;
        const double k = std::nearbyint(logmag * 1.4426950408889634074);
        const double r = (logmag - k * kLn2Hi) - k * kLn2Lo;
        return sign * std::ldexp(std::exp(r), static_cast<int>(k));
    }

    bool is_zero() const { return sign == 0; }

    LogReal operator*(const LogReal& o) const {
        if (sign == 0 || o.sign == 0) return {};
        return {sign * o.sign, logmag + o.logmag};
    }

    LogReal operator/(const LogReal& o) const {
        if (o.sign == 0) throw std::domain_error("LogReal: division by zero");
        if (sign == 0) return {};
        return {sign * o.sign, logmag - o.logmag};
    }
};

namespace detail {

// Neumaier-compensated accumulator; keeps quadrature and moment sums at
// ~1 ulp so the Poisson sum-vs-integral comparisons are not drowned by
// summation order noise.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

} // namespace detail

// Streaming log-sum-exp for non-negative terms. Values are added as logs;
// the running maximum rescales the mantissa sum on the fly.
class LogAccumulator {
public:
    void add_log(double lm) {
        if (lm == -std::numeric_limits<double>::infinity()) return;
        if (empty_) {
            max_ = lm;
            mantissa_.add(1.0);
            empty_ = false;
            return;
        }
        if (lm > max_) {
            double scale = std::exp(max_ - lm);
            double scaled = mantissa_.value() * scale;
            mantissa_ = {};
            mantissa_.add(scaled);
            mantissa_.add(1.0);
            max_ = lm;
        } else {
            mantissa_.add(std::exp(lm - max_));
        }
    }

    void add(const LogReal& v) {
        if (v.sign < 0) throw std::invalid_argument("LogAccumulator: negative term");
        if (v.sign == 0) return;
        add_log(v.logmag);
    }

    bool empty() const { return empty_; }

    LogReal result() const {
        if (empty_) return LogReal::zero();
        double m = mantissa_.value();
        if (m <= 0.0) return LogReal::zero();
        return LogReal::from_log(max_ + std::log(m));
    }

private:
    bool empty_ = true;
    double max_ = 0.0;
    detail::CompensatedSum mantissa_;
};

// Signed variant: positive and negative parts are accumulated separately and
// only combined at the end, so central moments with sign changes do not lose
// their small difference to cancellation inside the running sum.
class SignedLogAccumulator {
public:
    void add(const LogReal& v) {
        if (v.sign > 0) pos_.add_log(v.logmag);
        else if (v.sign < 0) neg_.add_log(v.logmag);
    }

    void add_log(double lm, int sign) { add(LogReal::from_log(lm, sign)); }

    LogReal result() const {
        LogReal p = pos_.result();
        LogReal n = neg_.result();
        if (n.sign == 0) return p;
        if (p.sign == 0) return {-1, n.logmag};
        if (p.logmag == n.logmag) return LogReal::zero();
        if (p.logmag > n.logmag)
            return LogReal::from_log(p.logmag + std::log1p(-std::exp(n.logmag - p.logmag)), +1);
        return LogReal::from_log(n.logmag + std::log1p(-std::exp(p.logmag - n.logmag)), -1);
    }

private:
    LogAccumulator pos_;
    LogAccumulator neg_;
};

// log(sum of terms); all terms must be >= 0. Empty input is exactly zero.
inline LogReal log_sum_exp(std::span<const LogReal> terms) {
    LogAccumulator acc;
    for (const auto& t : terms) acc.add(t);
    return acc.result();
}

inline LogReal log_sum_exp_signed(std::span<const LogReal> terms) {
    SignedLogAccumulator acc;
    for (const auto& t : terms) acc.add(t);
    return acc.result();
}

} // namespace balanced
