#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "filedrawer/conditional.hpp"
#include "filedrawer/normal.hpp"
#include "filedrawer/selection.hpp"

namespace filedrawer {

/// Tolerances and caps for the monotone inversion of p = F(x_obs; theta).
struct SolveConfig {
    double p_tolerance = 1e-10;
    double theta_tolerance = 1e-9;
    int max_bracket_expansions = 200;
    double initial_bracket_halfwidth = 20.0;
    int max_bisection_iters = 200;
};

struct QuantileSolution {
    double theta;
    double achieved_p;
    int iterations;
    std::pair<double, double> bracket;
};

/// Root bracketing or convergence failure; never thrown for a merely
/// extreme (but bracketable) solution.
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solves p = F(x_obs; theta, rule) for theta.  F is strictly decreasing in
/// theta, so the root is unique; it is found by doubling the bracket
/// half-width toward whichever side fails the sign condition, then plain
/// bisection.  Divergent solutions (Theorem-1 regime) are returned as
/// computed, never clamped.
inline QuantileSolution solve_theta(double p, double x_obs, const SelectionRule& rule,
                                    const SolveConfig& cfg = {}) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("solve_theta: p must lie in (0, 1)");
    }
    if (!std::isfinite(x_obs)) {
        throw std::domain_error("solve_theta: x_obs must be finite");
    }
    if (!rule.contains(x_obs)) {
        throw std::domain_error("solve_theta: x_obs outside the selection event");
    }

    const auto residual = [&](double theta) {
        return conditional_cdf(x_obs, theta, rule) - p;
    };

    // residual is decreasing in theta: want residual(lo) >= 0 >= residual(hi).
    double half = cfg.initial_bracket_halfwidth;
    double lo = x_obs - half;
    double hi = x_obs + half;
    double r_lo = residual(lo);
    double r_hi = residual(hi);
    int expansions = 0;
    while (r_lo < 0.0 && expansions < cfg.max_bracket_expansions) {
        half *= 2.0;
        lo = x_obs - half;
        r_lo = residual(lo);
        ++expansions;
    }
    half = cfg.initial_bracket_halfwidth;
    while (r_hi > 0.0 && expansions < cfg.max_bracket_expansions) {
        half *= 2.0;
        hi = x_obs + half;
        r_hi = residual(hi);
        ++expansions;
    }
    if (r_lo < 0.0 || r_hi > 0.0) {
        throw SolveError("solve_theta: no sign change after " +
                         std::to_string(expansions) + " bracket expansions (x_obs=" +
                         std::to_string(x_obs) + ", p=" + std::to_string(p) + ")");
    }

    int iters = 0;
    double mid = 0.5 * (lo + hi);
    double r_mid = residual(mid);
    while (iters < cfg.max_bisection_iters) {
        ++iters;
        mid = 0.5 * (lo + hi);
        r_mid = residual(mid);
        if (std::abs(r_mid) <= cfg.p_tolerance || (hi - lo) <= cfg.theta_tolerance) break;
        if (r_mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {mid, r_mid + p, iters, {lo, hi}};
}

/// theta*(p) = x_obs - quantile(p): the inversion of the unconditional
/// normal distribution function.
inline double conventional_theta(double p, double x_obs) {
    return x_obs - quantile(p);
}

}  // namespace filedrawer
