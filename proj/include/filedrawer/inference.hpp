#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "filedrawer/normal.hpp"
#include "filedrawer/selection.hpp"
#include "filedrawer/solve.hpp"

namespace filedrawer {

/// One observed statistic plus the rule under which it was reported.
struct InferenceProblem {
    double x_obs;
    SelectionRule rule;
    double alpha = 0.05;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 0.5)) {
            throw std::domain_error("InferenceProblem: alpha must lie in (0, 0.5)");
        }
        if (!rule.contains(x_obs)) {
            throw std::domain_error("InferenceProblem: x_obs outside the selection event");
        }
    }
};

enum class IntervalKind { Conditional, Conventional };

struct ConfidenceInterval {
    double lower;
    double upper;
    double level;
    IntervalKind kind;

    bool contains(double theta) const { return lower <= theta && theta <= upper; }
    double length() const { return upper - lower; }
};

/// theta(0.5): the selection-adjusted point estimate.
inline double median_unbiased(const InferenceProblem& problem, const SolveConfig& cfg = {}) {
    problem.validate();
    return solve_theta(0.5, problem.x_obs, problem.rule, cfg).theta;
}

/// Equal-tailed conditional interval [theta(1 - alpha/2), theta(alpha/2)].
inline ConfidenceInterval confidence_interval(const InferenceProblem& problem,
                                              const SolveConfig& cfg = {}) {
    problem.validate();
    const double lower = solve_theta(1.0 - problem.alpha / 2.0, problem.x_obs, problem.rule, cfg).theta;
    const double upper = solve_theta(problem.alpha / 2.0, problem.x_obs, problem.rule, cfg).theta;
    return {lower, upper, 1.0 - problem.alpha, IntervalKind::Conditional};
}

/// [theta*(1 - alpha/2), theta*(alpha/2)] = x_obs -+ quantile(1 - alpha/2),
/// the interval that ignores selection.
inline ConfidenceInterval conventional_interval(double x_obs, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("conventional_interval: alpha must lie in (0, 1)");
    }
    const double z = quantile(1.0 - alpha / 2.0);
    return {x_obs - z, x_obs + z, 1.0 - alpha, IntervalKind::Conventional};
}

/// Largest x_obs for which theta(p) stays below the critical value:
/// quantile(0.5 p + 0.5) + c.
inline double threshold_upper_below_c(double p, double c) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("threshold_upper_below_c: p in (0,1)");
    if (!(c > 0.0)) throw std::domain_error("threshold_upper_below_c: c must be positive");
    return quantile(0.5 * p + 0.5) + c;
}

/// Largest x_obs for which theta(p) stays negative:
/// quantile((1 - Phi(c)) p + Phi(c)).
inline double threshold_upper_below_zero(double p, double c) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("threshold_upper_below_zero: p in (0,1)");
    if (!(c > 0.0)) throw std::domain_error("threshold_upper_below_zero: c must be positive");
    return quantile(tail(c) * p + cdf(c));
}

/// One grid point of figure data: estimate, conditional bounds, and the
/// conventional bounds at the same level.
struct CurveRow {
    double x_obs;
    double mu;
    double lo;
    double hi;
    double conv_lo;
    double conv_hi;
};

/// Evaluates estimator and interval bounds across a grid of observed
/// statistics.  Grid points outside the selection event (possible only for
/// the non-randomized rules) are skipped; a solver failure on a retained
/// point aborts with the offending x_obs attached.
inline std::vector<CurveRow> curve(const InferenceProblem& problem_template,
                                   const std::vector<double>& x_grid,
                                   const SolveConfig& cfg = {},
                                   std::size_t* n_skipped = nullptr) {
    std::vector<CurveRow> rows;
    rows.reserve(x_grid.size());
    if (n_skipped) *n_skipped = 0;
    for (double x : x_grid) {
        if (!problem_template.rule.contains(x)) {
            if (n_skipped) ++*n_skipped;
            continue;
        }
        InferenceProblem problem = problem_template;
        problem.x_obs = x;
        try {
            const ConfidenceInterval ci = confidence_interval(problem, cfg);
            const ConfidenceInterval conv = conventional_interval(x, problem.alpha);
            rows.push_back({x, median_unbiased(problem, cfg), ci.lower, ci.upper,
                            conv.lower, conv.upper});
        } catch (const SolveError& e) {
            throw SolveError("curve: row x_obs=" + std::to_string(x) + ": " + e.what());
        }
    }
    return rows;
}

/// Figure-style grid: fine stepping (0.005) across the high-curvature band
/// within c + 0.5, coarser (0.01) beyond it.  Points are indexed multiples
/// of the step, so long grids do not accumulate drift.
inline std::vector<double> figure_grid(double x_min, double x_max, double c) {
    if (!(x_max >= x_min)) throw std::domain_error("figure_grid: empty range");
    std::vector<double> grid;
    const double split = c + 0.5;
    double base = x_min;
    grid.push_back(x_min);
    if (x_min < split - 1e-9) {
        for (long k = 1; x_min + k * 0.005 <= x_max + 1e-9; ++k) {
            base = x_min + k * 0.005;
            grid.push_back(base);
            if (base >= split - 1e-9) break;
        }
        if (base < split - 1e-9) return grid;  // range ended inside the fine band
    }
    for (long j = 1; base + j * 0.01 <= x_max + 1e-9; ++j) {
        grid.push_back(base + j * 0.01);
    }
    return grid;
}

}  // namespace filedrawer
