#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "filedrawer/normal.hpp"
#include "filedrawer/selection.hpp"

namespace filedrawer {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add_exp(double x, double y) {
    if (x == kNegInf) return y;
    if (y == kNegInf) return x;
    const double m = std::max(x, y);
    return m + std::log1p(std::exp(std::min(x, y) - m));
}

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
    double integral;
    double error;
};

template <class F>
GkEstimate gk15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = kKronrodW[7] * f(center);
    double gauss = kGaussW[3] * f(center);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kGkNodes[i];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrodW[i] * pair;
        if (i % 2 == 1) gauss += kGaussW[i / 2] * pair;
    }
    return {kronrod * half, std::abs(kronrod - gauss) * half};
}

/// Adaptive refinement of the 15-point Kronrod rule: repeatedly bisect the
/// panel with the largest error estimate until the summed estimate meets
/// the relative tolerance.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol) {
    struct Panel {
        double a, b, integral, error;
    };
    constexpr int kSeedPanels = 8;
    constexpr std::size_t kMaxPanels = 4096;

    std::vector<Panel> panels;
    panels.reserve(64);
    const double w = (b - a) / kSeedPanels;
    for (int i = 0; i < kSeedPanels; ++i) {
        const double lo = a + i * w;
        const double hi = (i + 1 == kSeedPanels) ? b : lo + w;
        const GkEstimate e = gk15(f, lo, hi);
        panels.push_back({lo, hi, e.integral, e.error});
    }

    const double min_width = 1e-13 * (b - a);
    while (panels.size() < kMaxPanels) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].integral;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (err <= std::max(rel_tol * std::abs(total), 1e-300)) break;
        Panel p = panels[worst];
        if (p.b - p.a < min_width) break;
        const double mid = 0.5 * (p.a + p.b);
        const GkEstimate left = gk15(f, p.a, mid);
        const GkEstimate right = gk15(f, mid, p.b);
        panels[worst] = {p.a, mid, left.integral, left.error};
        panels.push_back({mid, p.b, right.integral, right.error});
    }

    double total = 0.0;
    for (const Panel& p : panels) total += p.integral;
    return total;
}

/// log of the numerator integral of the randomized conditional CDFs,
///   int_{-inf}^{a} pdf(x - theta) * weight(x) dx,
/// in the shifted variable u = x - theta.  The weight is the selection
/// probability of X + W given X = x.  The integrand is evaluated as
/// exp(g(u) - m) with m close to max g, so the value survives regimes
/// where numerator and denominator both underflow in linear scale.
///
/// The window is [-12, min(a - theta, 12)] widened by the conditional
/// location shift (c -+ theta)/(1 + eta^2); with a fixed +-12 window the
/// accepted mass itself escapes once theta sits deep below the threshold.
inline double randomized_log_numerator(double a, double theta, double c, double eta,
                                       bool two_sided) {
    const double var = 1.0 + eta * eta;
    const double d1 = c - theta;    // X + W >= c branch
    const double d2 = -c - theta;   // X + W <= -c branch (two-sided only)

    double shift_lo = std::min(0.0, d1 / var);
    double shift_hi = std::max(0.0, d1 / var);
    if (two_sided) {
        shift_lo = std::min(shift_lo, d2 / var);
        shift_hi = std::max(shift_hi, d2 / var);
    }
    const double u_lo = shift_lo - 12.0;
    const double u_hi = std::min(a - theta, shift_hi + 12.0);
    if (!(u_hi > u_lo)) return kNegInf;

    const auto log_integrand = [&](double u) {
        double lw = log_tail((d1 - u) / eta);
        if (two_sided) lw = log_add_exp(lw, log_tail((u - d2) / eta));
        return -0.5 * u * u - kLogSqrt2Pi + lw;
    };

    double m = kNegInf;
    constexpr int kScanPoints = 9;
    for (int i = 0; i < kScanPoints; ++i) {
        const double u = u_lo + (u_hi - u_lo) * i / (kScanPoints - 1);
        m = std::max(m, log_integrand(u));
    }
    if (m == kNegInf) return kNegInf;

    const double scaled = integrate_adaptive(
        [&](double u) { return std::exp(log_integrand(u) - m); }, u_lo, u_hi, 1e-10);
    if (!(scaled > 0.0)) return kNegInf;
    return m + std::log(scaled);
}

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::domain_error(std::string("conditional_cdf: ") + what + " must be finite");
    }
}

}  // namespace detail

/// Diagnostic decomposition of a conditional CDF value: the probability
/// together with the log numerator and log denominator of its ratio form.
struct ConditionalCdfResult {
    double p;
    double log_numerator;
    double log_denominator;
};

/// F(a; theta, c) = Pr(X <= a | X >= c) for X ~ N(theta, 1).
/// Evaluated as 1 - exp(log_tail(a-theta) - log_tail(c-theta)) so the ratio
/// of the two tails survives theta -> -inf.
inline double one_sided_cdf(double a, double theta, double c) {
    detail::require_finite(a, "a");
    detail::require_finite(theta, "theta");
    if (a < c) {
        throw std::domain_error("one_sided_cdf: statistic outside conditioning event (a < c)");
    }
    const double delta = std::min(0.0, log_tail(a - theta) - log_tail(c - theta));
    return -std::expm1(delta);
}

/// Pr(X <= a | |X| >= c), piecewise closed form:
///   [min(Phi(a-t), Phi(-c-t)) + 1{a>c} (Phi(a-t) - Phi(c-t))]
///   / [Phi(-c-t) + Phi(-c+t)].
/// The indicator difference is taken between upper tails, which is the same
/// quantity without cancellation when both arguments are far negative.
inline double two_sided_cdf(double a, double theta, double c) {
    detail::require_finite(a, "a");
    detail::require_finite(theta, "theta");
    if (std::abs(a) < c) {
        throw std::domain_error("two_sided_cdf: statistic outside conditioning event (|a| < c)");
    }
    const double den = tail(c + theta) + tail(c - theta);
    double num = std::min(cdf(a - theta), tail(c + theta));
    if (a > c) num += tail(c - theta) - tail(a - theta);
    if (den > 0.0) {
        return std::clamp(num / den, 0.0, 1.0);
    }
    // Both sides underflow in linear scale; form the ratio from logs.
    double log_num = std::min(log_tail(theta - a), log_tail(c + theta));
    if (a > c) {
        const double delta =
            std::min(0.0, log_tail(a - theta) - log_tail(c - theta));
        log_num = detail::log_add_exp(log_num, log_tail(c - theta) + std::log1p(-std::exp(delta)));
    }
    const double log_den = detail::log_add_exp(log_tail(c + theta), log_tail(c - theta));
    return std::clamp(std::exp(log_num - log_den), 0.0, 1.0);
}

/// F_R(a; theta, c) = Pr(X <= a | X + W >= c), W ~ N(0, eta^2).
/// Numerator by adaptive Gauss-Kronrod quadrature of pdf(x-theta) times the
/// selection weight; denominator from Var(X + W) = 1 + eta^2.
inline double randomized_one_sided_cdf(double a, double theta, double c, double eta) {
    detail::require_finite(a, "a");
    detail::require_finite(theta, "theta");
    if (!(eta > 0.0)) {
        throw std::domain_error("randomized_one_sided_cdf: eta must be positive");
    }
    const double s = std::sqrt(1.0 + eta * eta);
    const double log_num = detail::randomized_log_numerator(a, theta, c, eta, false);
    const double log_den = log_tail((c - theta) / s);
    return std::clamp(std::exp(log_num - log_den), 0.0, 1.0);
}

/// Pr(X <= a | |X + W| >= c): both selection branches enter the weight and
/// the denominator.
inline double randomized_two_sided_cdf(double a, double theta, double c, double eta) {
    detail::require_finite(a, "a");
    detail::require_finite(theta, "theta");
    if (!(eta > 0.0)) {
        throw std::domain_error("randomized_two_sided_cdf: eta must be positive");
    }
    const double s = std::sqrt(1.0 + eta * eta);
    const double log_num = detail::randomized_log_numerator(a, theta, c, eta, true);
    const double log_den =
        detail::log_add_exp(log_tail((c - theta) / s), log_tail((c + theta) / s));
    return std::clamp(std::exp(log_num - log_den), 0.0, 1.0);
}

/// Single entry point used by the inversion and Monte Carlo layers.
inline double conditional_cdf(double a, double theta, const SelectionRule& rule) {
    switch (rule.kind) {
        case RuleKind::OneSided: return one_sided_cdf(a, theta, rule.c);
        case RuleKind::TwoSided: return two_sided_cdf(a, theta, rule.c);
        case RuleKind::RandomizedOneSided:
            return randomized_one_sided_cdf(a, theta, rule.c, rule.eta);
        case RuleKind::RandomizedTwoSided:
            return randomized_two_sided_cdf(a, theta, rule.c, rule.eta);
    }
    throw std::logic_error("conditional_cdf: unknown rule kind");
}

/// Same dispatch, with the log-ratio diagnostics attached.
inline ConditionalCdfResult conditional_cdf_result(double a, double theta,
                                                   const SelectionRule& rule) {
    ConditionalCdfResult r{};
    r.p = conditional_cdf(a, theta, rule);
    switch (rule.kind) {
        case RuleKind::OneSided: {
            const double delta =
                std::min(0.0, log_tail(a - theta) - log_tail(rule.c - theta));
            r.log_denominator = log_tail(rule.c - theta);
            r.log_numerator =
                (delta == 0.0) ? detail::kNegInf
                               : r.log_denominator + std::log1p(-std::exp(delta));
            break;
        }
        case RuleKind::TwoSided: {
            const double t = theta, c = rule.c;
            double log_num = std::min(log_tail(t - a), log_tail(c + t));
            if (a > c) {
                const double delta = std::min(0.0, log_tail(a - t) - log_tail(c - t));
                if (delta < 0.0) {
                    log_num = detail::log_add_exp(
                        log_num, log_tail(c - t) + std::log1p(-std::exp(delta)));
                }
            }
            r.log_numerator = log_num;
            r.log_denominator = detail::log_add_exp(log_tail(c + t), log_tail(c - t));
            break;
        }
        case RuleKind::RandomizedOneSided:
        case RuleKind::RandomizedTwoSided: {
            const bool two = rule.kind == RuleKind::RandomizedTwoSided;
            const double s = std::sqrt(1.0 + rule.eta * rule.eta);
            r.log_numerator =
                detail::randomized_log_numerator(a, theta, rule.c, rule.eta, two);
            r.log_denominator =
                two ? detail::log_add_exp(log_tail((rule.c - theta) / s),
                                          log_tail((rule.c + theta) / s))
                    : log_tail((rule.c - theta) / s);
            break;
        }
    }
    return r;
}

}  // namespace filedrawer
