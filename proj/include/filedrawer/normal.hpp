#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace filedrawer {

namespace detail {
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;
inline constexpr double kInvSqrt2  = 0.7071067811865475244008444;
}  // namespace detail

/// Standard normal density.
inline double pdf(double x) {
    return detail::kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Standard normal CDF, evaluated through erfc so that both tails keep
/// full relative accuracy.
inline double cdf(double x) {
    return 0.5 * std::erfc(-x * detail::kInvSqrt2);
}

/// Upper tail 1 - cdf(x), computed directly from erfc (never as 1 - cdf,
/// which would cancel for large x).
inline double tail(double x) {
    return 0.5 * std::erfc(x * detail::kInvSqrt2);
}

/// log(1 - cdf(x)).  Uses log(tail) while tail is comfortably inside the
/// normal double range and an asymptotic Mills-ratio expansion
///   tail(x) ~ pdf(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
/// for large x, where erfc itself would drift into subnormals.
inline double log_tail(double x) {
    if (x < 30.0) {
        return std::log(tail(x));
    }
    const double inv_x2 = 1.0 / (x * x);
    double term = 1.0;
    double series = 1.0;
    for (int k = 1; k < 30; ++k) {
        term *= -(2.0 * k - 1.0) * inv_x2;
        series += term;
        if (std::abs(term) < 1e-17 * series) break;
    }
    return -0.5 * x * x - std::log(x) - detail::kLogSqrt2Pi + std::log(series);
}

/// Inverse standard normal CDF.  Acklam's rational approximation polished
/// by a Halley step against cdf(); the step converges cubically from the
/// 1.15e-9 starting error, which lands at a few ulp.
inline double quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("quantile: p must lie in (0, 1)");
    }

    static constexpr double a[6] = {
        -3.969683028665376e+01,  2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01,  2.506628277459239e+00};
    static constexpr double b[5] = {
        -5.447609879822406e+01,  1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[6] = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00,  4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {
         7.784695709041462e-03,  3.224671290700398e-01,  2.445134137142996e+00,
         3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement; skipped once pdf(x) would be subnormal.
    if (std::abs(x) < 37.0) {
        const double err = cdf(x) - p;
        const double u = err / pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

}  // namespace filedrawer
