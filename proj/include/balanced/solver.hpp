#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_map>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "balanced/errors.hpp"
#include "balanced/model.hpp"
#include "balanced/parallel.hpp"
#include "balanced/quadrature.hpp"
#include "balanced/roots.hpp"

namespace balanced {

struct MaxIterExceeded : std::runtime_error {
    BalancedModel last_model;
    MaxIterExceeded(const std::string& what, BalancedModel m)
        : std::runtime_error(what), last_model(std::move(m)) {}
};

namespace detail {

// Boundary panel width and quantized cutoff from the problem size alone;
// shared by the engine and by solve() so both agree bit-exactly.
struct GridParams {
    double pb;
    double t_cut;
};

inline GridParams grid_params(std::size_t n_coeffs, double x_max) {
    const double kappa_max =
        std::max(8.0, static_cast<double>(n_coeffs) + 1.0 - 0.6 * x_max + 14.0 * std::sqrt(x_max));
    double pb = 0.125;
    while (pb > 6.0 / kappa_max) pb *= 0.5;
    return {pb, std::floor(std::log(x_max) / pb) * pb};
}

// All moment integrals M_i = int_0^xmax x^i / f dx are evaluated in t = log x,
// where the integrands e^{(i+1)t - log f} are log-concave with width
// ~ x^{-1/2}. Every integral goes through integrate_logspace; the specs below
// snap panel edges to a power-of-two lattice so that nodes coincide across i
// and a shared log-f table turns ~10^5 series evaluations per sweep into
// ~10^4 table lookups.
class MomentEngine {
public:
    MomentEngine(const std::vector<double>& lambda, double x_max, int workers = 1)
        : lambda_(lambda), x_max_(x_max), workers_(workers) {
        // The cutoff must sit on a panel edge: a Gauss panel straddling the
        // hard cutoff sees a jump and loses a few percent of the boundary
        // mass. Quantizing costs at most a factor e^{pb} in cutoff position.
        const GridParams gp = grid_params(lambda_.size(), x_max);
        pb_ = gp.pb;
        t_cut_ = gp.t_cut;
        scan();
        fill_tables();
    }

    // effective integration cutoff in t (= log of effective x_max)
    double t_cut() const { return t_cut_; }

    // log M_a for real a > -1 (continuous coefficient function).
    double log_moment(double a) const { return moments<1>(a, 0.0)[0].logmag; }

    // log of int x^a / f(x)^2 dx, the moment family behind the balance
    // Jacobian d log M_i / d lambda_j.
    double log_moment_sq(double a) const {
        const auto [spec, boundary] = make_spec(a, 2.0);
        return integrate_logspace(integrand(a, boundary, 2.0), spec).logmag;
    }

    // signed moments int (t - pivot)^k x^a / f dx, k = 0..K-1
    template <std::size_t K>
    std::array<LogReal, K> moments(double a, double pivot) const {
        const auto [spec, boundary] = make_spec(a);
        return integrate_logspace_moments<K>(integrand(a, boundary), spec, pivot);
    }

    std::vector<double> all_log_moments() const {
        const std::size_t n = lambda_.size();
        std::vector<double> out(n);
        parallel_for(n, workers_, [&](std::size_t i) {
            out[i] = log_moment(static_cast<double>(i));
        });
        return out;
    }

    // Laplace-type integrand g(t) = (a+1) t - power * log f(e^t), zero past
    // the cutoff.
    LogIntegrand integrand(double a, bool boundary_grid, double power = 1.0) const {
        const auto& memo = boundary_grid ? memo_b_ : memo_i_;
        return [this, a, power, &memo](double t) -> LogReal {
            if (t > t_cut_) return LogReal::zero();
            const auto it = memo.find(t);
            const double lf = it != memo.end() ? it->second : series::log_f(lambda_, t);
            return LogReal::from_log((a + 1.0) * t - power * lf);
        };
    }

    // Window selection from the coarse profile scan; boundary integrands
    // (mass within e^{-40} of the cutoff) move to the fine panel lattice.
    std::pair<QuadratureSpec, bool> make_spec(double a, double power = 1.0) const {
        const std::size_t nc = coarse_t_.size();
        double best = -std::numeric_limits<double>::infinity();
        std::size_t kb = 0;
        for (std::size_t k = 0; k < nc; ++k) {
            const double v = (a + 1.0) * coarse_t_[k] - power * coarse_lf_[k];
            if (v > best) {
                best = v;
                kb = k;
            }
        }
        auto phi = [&](std::size_t k) {
            return (a + 1.0) * coarse_t_[k] - power * coarse_lf_[k];
        };
        std::size_t klo = kb, khi = kb;
        while (klo > 0 && phi(klo - 1) >= best - 50.0) --klo;
        while (khi + 1 < nc && phi(khi + 1) >= best - 50.0) ++khi;
        const bool boundary = phi(nc - 1) >= best - 40.0;
        const double p = boundary ? pb_ : 0.125;
        double lo = coarse_t_[klo] - 0.26, hi = std::min(coarse_t_[khi] + 0.26, t_cut_);
        long k_lo = static_cast<long>(std::floor(lo / p));
        long k_hi = static_cast<long>(std::ceil(hi / p));
        if (boundary) k_hi = std::lround(t_cut_ / p);  // exact on-grid cutoff edge
        if (((k_hi - k_lo) & 1) != 0) ++k_hi;  // even panel count keeps tails on-lattice
        QuadratureSpec spec;
        spec.center = 0.5 * (k_lo * p + k_hi * p);
        spec.half_width = 0.5 * (k_hi * p - k_lo * p);
        spec.core_nodes = static_cast<int>(k_hi - k_lo) * gauss::kNodes;
        spec.abs_log_tol = 1e-13;
        return {spec, boundary};
    }

private:
    void scan() {
        const double lo = -16.0;
        const std::size_t n = static_cast<std::size_t>((t_cut_ - lo) / 0.25) + 2;
        coarse_t_.resize(n);
        coarse_lf_.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            coarse_t_[k] = std::min(lo + 0.25 * static_cast<double>(k), t_cut_);
        parallel_for(n, workers_, [&](std::size_t k) {
            coarse_lf_[k] = series::log_f(lambda_, coarse_t_[k]);
        });
    }

    // Eager node tables. Panel node positions are reproduced bit-exactly by
    // integrate_logspace because every edge is an exact multiple of a
    // power-of-two width.
    void fill_strip(double p, double lo, double hi, std::unordered_map<double, double>& memo) {
        const long k_lo = static_cast<long>(std::floor(lo / p));
        const long k_hi = static_cast<long>(std::ceil(hi / p));
        std::vector<double> nodes;
        nodes.reserve(static_cast<std::size_t>(k_hi - k_lo) * gauss::kNodes);
        for (long k = k_lo; k < k_hi; ++k) {
            const double a = static_cast<double>(k) * p, b = static_cast<double>(k + 1) * p;
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int j = 0; j < gauss::kNodes; ++j) nodes.push_back(mid + half * gauss::x[j]);
        }
        std::vector<double> vals(nodes.size());
        parallel_for(nodes.size(), workers_, [&](std::size_t k) {
            vals[k] = nodes[k] > t_cut_ ? 0.0 : series::log_f(lambda_, nodes[k]);
        });
        memo.reserve(memo.size() + nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) memo.emplace(nodes[k], vals[k]);
    }

    void fill_tables() {
        fill_strip(0.125, -16.5, t_cut_ + 0.25, memo_i_);
        fill_strip(pb_, t_cut_ - 3.0, t_cut_, memo_b_);
    }

    const std::vector<double>& lambda_;
    double x_max_;
    int workers_;
    double t_cut_ = 0.0, pb_ = 0.015625;
    std::vector<double> coarse_t_, coarse_lf_;
    std::unordered_map<double, double> memo_i_, memo_b_;
};

} // namespace detail

namespace detail {

// Largest degree whose moment integrand still peaks safely inside the cutoff.
// Rows above it cannot satisfy the balance condition on a truncated domain
// (their integrals are cutoff-starved) and would otherwise drag the scale
// gauge of the whole iteration; they sit far outside every trusted range.
// The 5-sigma margin also keeps the junction row's self-coupling through the
// extension tail (gain ~ truncation fraction * tail length) far below one.
inline int balanceable_degree(int n_trunc, double x_eff) {
    return std::min(n_trunc, static_cast<int>(std::floor(x_eff - 5.0 * std::sqrt(x_eff))));
}

// Extension slope: deviation of lambda's growth from factorial growth,
// measured a few sigma below the junction. Rows there barely feel the
// extension through their own moments, which cuts the junction's
// self-coupling loop (slope -> tail -> f -> junction moment -> slope).
inline int slope_row(int i_bal) {
    return std::max(2, i_bal - static_cast<int>(std::ceil(3.0 * std::sqrt(i_bal))));
}

inline double junction_slope(const std::vector<double>& lambda, int i_bal) {
    const int j = slope_row(i_bal);
    return (lambda[j] - lambda[j - 1]) -
           (std::lgamma(j + 1.0) - std::lgamma(static_cast<double>(j)));
}

// Continue lambda above the junction with factorial growth plus a linear
// correction, anchored (value and slope) at the deep row: the extension then
// depends on no row whose own moment it influences, so the iteration has no
// feedback loop through the tail. The small first-difference irregularity
// this leaves at the junction is far below the log(i) coefficient gaps.
inline void apply_extension(std::vector<double>& lambda, int i_bal) {
    const int n = static_cast<int>(lambda.size()) - 1;
    if (i_bal < 3 || i_bal >= n) return;
    const int j = slope_row(i_bal);
    const double slope = junction_slope(lambda, i_bal);
    for (int i = i_bal + 1; i <= n; ++i)
        lambda[i] = lambda[j] + (std::lgamma(i + 1.0) - std::lgamma(j + 1.0)) +
                    slope * (i - j);
}

} // namespace detail

// The integration cutoff actually used: x_max quantized onto the boundary
// panel grid (a Gauss panel straddling the hard cutoff would lose boundary
// mass, so the cutoff sits on a panel edge).
inline double effective_x_max(const BalancedModel& model) {
    return std::exp(detail::grid_params(model.lambda.size(), model.x_max).t_cut);
}

// One application of the balancing map: lambda_i <- (1 - theta) lambda_i +
// theta log M_i for 1 <= i <= i_bal, the i = 0 row carrying the divisor
// weight lambda_0 <- (1 - theta) lambda_0 + theta (log M_0 - log(1 - beta)).
// Rows above i_bal (cutoff-starved, untrusted) are continued with factorial
// growth matched in value and first difference at the junction. No
// normalization is applied inside the step.
inline BalancedModel t_step(const BalancedModel& model, double damping = 1.0, int workers = 1) {
    detail::MomentEngine eng(model.lambda, model.x_max, workers);
    const int i_bal = detail::balanceable_degree(model.degree(), std::exp(eng.t_cut()));
    std::vector<double> logM(i_bal + 1);
    parallel_for(static_cast<std::size_t>(i_bal) + 1, workers, [&](std::size_t i) {
        logM[i] = eng.log_moment(static_cast<double>(i));
    });
    BalancedModel out = model;
    for (int i = 0; i <= i_bal; ++i) {
        double target = logM[i];
        if (i == 0) target -= std::log1p(-model.beta);
        out.lambda[i] = (1.0 - damping) * model.lambda[i] + damping * target;
        if (!std::isfinite(out.lambda[i]))
            throw DivergentIterate("t_step: non-finite lambda at i = " + std::to_string(i));
    }
    detail::apply_extension(out.lambda, i_bal);
    return out;
}

// Two-parameter rescale f(x) -> kappa f(mu x) landing on the balance constant
// C = 1 and f(0) = 1 simultaneously. mu is read off the balance residuals
// (c_i M_i = C for i >= 1), kappa = 1/c_0.
namespace detail {

inline BalancedModel finalize_with_mu(const BalancedModel& model, int workers, double* log_mu_out) {
    MomentEngine eng(model.lambda, model.x_max, workers);
    const std::vector<double> logM = eng.all_log_moments();
    const int band_hi = std::max(2, std::min(model.trusted_degree, model.degree()));
    std::vector<double> r;
    r.reserve(band_hi);
    for (int i = 1; i <= band_hi; ++i) r.push_back(logM[i] - model.lambda[i]);
    std::nth_element(r.begin(), r.begin() + r.size() / 2, r.end());
    const double log_mu = r[r.size() / 2];
    if (log_mu_out) *log_mu_out = log_mu;
    BalancedModel out = model;
    for (int i = 0; i <= model.degree(); ++i) out.lambda[i] = model.lambda[i] - i * log_mu;
    const double log_kappa = -out.lambda[0];
    for (double& l : out.lambda) l += log_kappa;
    return out;
}

} // namespace detail

inline BalancedModel finalize_normalization(const BalancedModel& model, int workers = 1) {
    return detail::finalize_with_mu(model, workers, nullptr);
}

// Direct check of the defining equation: lhs = int_0^xmax f(sx)/f(x) dx,
// rhs = 1/(1-s) - beta.
struct E1Check {
    double lhs = 0.0, rhs = 0.0, residual = 0.0;
};

inline E1Check check_e1(const BalancedModel& model, double s) {
    if (s < 0.0 || s >= 1.0) throw std::invalid_argument("check_e1: s must be in [0, 1)");
    const double t_hi = std::log(model.x_max);
    const double log_s = std::log(s);
    auto log_integrand_at = [&](double t) {
        const double lf = series::log_f(model.lambda, t);
        const double lfs = s == 0.0 ? 0.0 : series::log_f(model.lambda, t + log_s);
        return lfs - lf + t;
    };
    // coarse peak location
    double best = -std::numeric_limits<double>::infinity(), t_best = 0.0;
    for (double t = -16.0; t <= t_hi; t += 0.25) {
        const double v = log_integrand_at(t);
        if (v > best) {
            best = v;
            t_best = t;
        }
    }
    if (log_integrand_at(t_hi) > best - std::log(1e12))
        throw TailNotConverged("check_e1: integrand at x_max above 1e-12 of peak (s too close to 1)");
    LogIntegrand g = [&](double t) -> LogReal {
        if (t > t_hi) return LogReal::zero();
        return LogReal::from_log(log_integrand_at(t));
    };
    QuadratureSpec spec;
    spec.center = t_best;
    spec.half_width = 4.0;
    spec.core_nodes = 64 * gauss::kNodes;
    spec.abs_log_tol = 1e-13;
    E1Check out;
    out.lhs = std::exp(integrate_logspace(g, spec).logmag);
    out.rhs = 1.0 / (1.0 - s) - model.beta;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 500;
    int workers = 1;
};


// Fixed-point solve of the balance conditions with continuation support.
// Iterates t_step on lambda_0-pinned iterates until sup_i |delta lambda_i|
// < tol, then applies finalize_normalization.
inline BalancedModel solve(double beta, int n_trunc, double x_max, double tol, int max_iter,
                           const BalancedModel* warm_start = nullptr,
                           const SolveOptions& opts_in = {}) {
    if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("solve: beta must be in [0, 1)");
    if (n_trunc < 8 || x_max <= 1.0) throw std::invalid_argument("solve: degenerate problem size");
    SolveOptions opts = opts_in;
    opts.tol = tol;
    opts.max_iter = max_iter;

    BalancedModel m;
    m.beta = beta;
    m.n_trunc = n_trunc;
    m.x_max = x_max;
    m.trusted_degree = default_trusted_degree(x_max);
    if (warm_start && !warm_start->lambda.empty()) {
        m.lambda = warm_start->lambda;
        m.lambda.resize(n_trunc + 1, 0.0);
        if (warm_start->degree() < n_trunc)
            for (int i = warm_start->degree() + 1; i <= n_trunc; ++i)
                m.lambda[i] = std::lgamma(i + 1.0);
    } else {
        m.lambda.resize(n_trunc + 1);
        for (int i = 0; i <= n_trunc; ++i) m.lambda[i] = std::lgamma(i + 1.0);
    }
    const double l0 = m.lambda[0];
    for (double& l : m.lambda) l -= l0;

    // Rows 0..i_bal and unknowns lambda_0..lambda_{i_bal} form a square
    // system: the i >= 1 rows are the balance conditions, the i = 0 row
    // carries the divisor weight (c_0 M_0 = 1 - beta) and anchors the scale
    // direction f(x) -> f(mu x) that fixed-point iteration leaves
    // quasi-neutral (measured: plain, damped and Anderson-mixed T-iterations
    // all drift or park at an arbitrary balance constant). The remaining
    // exact degeneracy, f -> kappa f, is handled by bordering the least
    // squares system with a lambda_0 pin. Newton's direction comes from the
    // analytic Jacobian d log M_i / d lambda_j = -E_i[pi_j], an expectation
    // of the series weights computed from the moment family int x^k / f^2.
    const int i_bal = detail::balanceable_degree(
        m.degree(), std::exp(detail::grid_params(m.lambda.size(), m.x_max).t_cut));
    if (i_bal < 8) throw std::invalid_argument("solve: x_max too small for the truncation");
    detail::apply_extension(m.lambda, i_bal);

    // The truncated system is overdetermined by one: the kappa invariance
    // (f -> kappa f, with the extension co-moving) makes the balanced block's
    // equations compatible only up to truncation-scale terms concentrated at
    // the junction. The least-squares step below absorbs that incompatibility
    // in the junction zone; convergence is judged where the model is trusted.
    const std::size_t i_conv = static_cast<std::size_t>(
        std::max(2, std::min(m.trusted_degree, i_bal)));
    double sup_delta = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    const std::size_t nb = static_cast<std::size_t>(i_bal) + 1;
    std::vector<double> F(nb), logM(nb);
    while (total_iters < opts.max_iter) {
        ++total_iters;
        detail::MomentEngine eng(m.lambda, m.x_max, opts.workers);
        parallel_for(nb, opts.workers, [&](std::size_t i) {
            logM[i] = eng.log_moment(static_cast<double>(i));
        });
        sup_delta = 0.0;
        double sup_full = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < nb; ++i) {
            F[i] = logM[i] - m.lambda[i];
            if (i == 0) F[i] -= std::log1p(-m.beta);
            finite = finite && std::isfinite(F[i]);
            sup_full = std::max(sup_full, std::abs(F[i]));
            if (i <= i_conv) sup_delta = std::max(sup_delta, std::abs(F[i]));
        }
        if (!finite)
            throw DivergentIterate("solve: non-finite residual at iteration " +
                                   std::to_string(total_iters));
        if (std::getenv("BALANCED_TRACE"))
            std::fprintf(stderr, "  [solve b=%.3g it=%d] sup_trusted=%.3e sup_full=%.3e\n",
                         m.beta, total_iters, sup_delta, sup_full);
        if (sup_delta < opts.tol && total_iters > 1) break;

        // K_{ij} = E_i[pi_j] = c_j Q_{i+j} / M_i over the balanced block,
        // plus the tail columns folded through the extension's anchor rows.
        // The Newton system is bordered: the kappa gauge is fixed by the
        // constraint row (delta lambda_0 = 0) and the one-dimensional
        // incompatibility of the truncated block (its equations outnumber
        // its gauge-reduced unknowns by one) is absorbed by a multiplier on
        // the junction row, whose moment leans hardest on the modeled
        // extension. Every other equation is solved exactly at convergence.
        const std::size_t nu = nb + 1;  // unknowns: delta lambda_0..i_bal, rho
        const int js = detail::slope_row(i_bal);
        const int k_cap = std::min(m.degree(),
                                   static_cast<int>(std::exp(eng.t_cut()) +
                                                    6.0 * std::sqrt(std::exp(eng.t_cut()))));
        std::vector<double> logQ(nb + static_cast<std::size_t>(k_cap) + 1);
        parallel_for(logQ.size(), opts.workers, [&](std::size_t k) {
            logQ[k] = eng.log_moment_sq(static_cast<double>(k));
        });
        std::vector<double> J(nu * nu, 0.0), rhs(nu, 0.0);
        parallel_for(nb, opts.workers, [&](std::size_t r) {
            // d log M_r / d lambda_j = +E_r[pi_j]: raising lambda_j shrinks f,
            // which grows every moment.
            for (std::size_t j = 0; j < nb; ++j)
                J[r * nu + j] = std::exp(-m.lambda[j] + logQ[r + j] - logM[r]);
            double s1 = 0.0, s0 = 0.0;
            for (int k = i_bal + 1; k <= k_cap; ++k) {
                const double krk = std::exp(-m.lambda[k] + logQ[r + k] - logM[r]);
                s1 += krk * (1.0 + (k - js));
                s0 += krk * (k - js);
            }
            J[r * nu + js] += s1;  // extension rows move with the anchor
            J[r * nu + (js - 1)] -= s0;
            J[r * nu + r] -= 1.0;  // d(-lambda_r)/d lambda_r
            rhs[r] = -F[r];
        });
        J[(nb - 1) * nu + nb] = 1.0;  // rho absorbs the junction-row misfit
        J[nb * nu + 0] = 1.0;         // constraint: delta lambda_0 = 0
        // LU with partial pivoting
        for (std::size_t c = 0; c < nu; ++c) {
            std::size_t pr = c;
            for (std::size_t r = c + 1; r < nu; ++r)
                if (std::abs(J[r * nu + c]) > std::abs(J[pr * nu + c])) pr = r;
            if (J[pr * nu + c] == 0.0)
                throw DivergentIterate("solve: singular Newton system");
            if (pr != c) {
                for (std::size_t j = 0; j < nu; ++j) std::swap(J[pr * nu + j], J[c * nu + j]);
                std::swap(rhs[pr], rhs[c]);
            }
            for (std::size_t r = c + 1; r < nu; ++r) {
                const double f = J[r * nu + c] / J[c * nu + c];
                J[r * nu + c] = 0.0;
                for (std::size_t j = c + 1; j < nu; ++j) J[r * nu + j] -= f * J[c * nu + j];
                rhs[r] -= f * rhs[c];
            }
        }
        std::vector<double> b(nu);
        for (std::size_t i = nu; i-- > 0;) {
            double acc = rhs[i];
            for (std::size_t j = i + 1; j < nu; ++j) acc -= J[i * nu + j] * b[j];
            b[i] = acc / J[i * nu + i];
        }
        b.pop_back();  // drop rho; b now holds delta lambda_0..i_bal
        double step_sup = 0.0;
        for (double v : b) step_sup = std::max(step_sup, std::abs(v));
        const double trust = step_sup > 1.0 ? 1.0 / step_sup : 1.0;  // trust region
        // Backtracking: big continuation jumps (warm start far from the new
        // beta) can overshoot; accept the first step fraction that clearly
        // reduces the system residual, else the best one seen.
        double sup_sys = 0.0;
        for (std::size_t r = 0; r + 1 < nb; ++r) sup_sys = std::max(sup_sys, std::abs(F[r]));
        std::vector<double> best_lambda;
        double best_sup = std::numeric_limits<double>::infinity();
        for (int bt = 0; bt < 4; ++bt) {
            const double cap = trust / static_cast<double>(1 << bt);
            std::vector<double> cand = m.lambda;
            for (std::size_t j = 0; j < nb; ++j) cand[j] += cap * b[j];
            detail::apply_extension(cand, i_bal);
            bool finite = true;
            for (double v : cand) finite = finite && std::isfinite(v);
            if (!finite) continue;
            detail::MomentEngine ec(cand, m.x_max, opts.workers);
            std::vector<double> Fc(nb - 1);
            parallel_for(nb - 1, opts.workers, [&](std::size_t r) {
                Fc[r] = ec.log_moment(static_cast<double>(r)) - cand[r];
                if (r == 0) Fc[r] -= std::log1p(-m.beta);
            });
            double sup_c = 0.0;
            for (double v : Fc) sup_c = std::max(sup_c, std::abs(v));
            if (sup_c < best_sup) {
                best_sup = sup_c;
                best_lambda = std::move(cand);
            }
            if (sup_c <= 0.5 * sup_sys) break;
        }
        if (best_lambda.empty())
            throw DivergentIterate("solve: non-finite iterate at iteration " +
                                   std::to_string(total_iters));
        if (best_sup < 0.999 * sup_sys) {
            m.lambda = std::move(best_lambda);
        } else {
            // Newton direction gave no decrease (iterate far outside the
            // quadratic basin, e.g. a long continuation jump): take one
            // damped balancing-map step instead, which is globally
            // attracting, and retry Newton from there.
            BalancedModel stepped = t_step(m, 0.5, opts.workers);
            const double pin = stepped.lambda[0];
            for (std::size_t k = 0; k < m.lambda.size(); ++k)
                m.lambda[k] = stepped.lambda[k] - pin;
            detail::apply_extension(m.lambda, i_bal);
        }
    }
    m.report.iterations = total_iters;
    m.report.final_sup_delta = sup_delta;
    m.report.damping_used = 1.0;
    m.report.converged = sup_delta < opts.tol;

    BalancedModel out = finalize_normalization(m, opts.workers);
    out.report = m.report;

    {
        detail::MomentEngine eng(out.lambda, out.x_max, opts.workers);
        const std::vector<double> logM = eng.all_log_moments();
        double worst = 0.0;
        for (int i = 1; i <= out.trusted_degree; ++i)
            worst = std::max(worst, std::abs(std::expm1(logM[i] - out.lambda[i])));
        worst = std::max(worst,
                         std::abs(std::exp(logM[0] - out.lambda[0]) - (1.0 - out.beta)));
        out.report.max_balance_residual = worst;
    }
    for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        try {
            out.report.e1_residuals[s] = check_e1(out, s).residual;
        } catch (const TailNotConverged&) {
            // s too close to 1 for this x_max; sample what the window supports
        }
    }

    if (!out.report.converged)
        throw MaxIterExceeded("solve: sup-delta " + std::to_string(sup_delta) + " after " +
                                  std::to_string(total_iters) + " iterations (tol " +
                                  std::to_string(tol) + ")",
                              out);
    return out;
}

} // namespace balanced
