#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "filedrawer/conditional.hpp"
#include "filedrawer/inference.hpp"
#include "filedrawer/normal.hpp"
#include "filedrawer/selection.hpp"

namespace filedrawer {

namespace detail {

/// SplitMix64 used as a counter-based stream: the i-th output is a pure
/// function of (seed, i), so chunks of draws can be generated in any order
/// or concurrently without changing the sequence.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform on the open interval (0, 1), 53-bit resolution.
inline double uniform_at(std::uint64_t seed, std::uint64_t index) {
    return (static_cast<double>(splitmix64_at(seed, index) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by inverse-CDF transform of the counter stream.
inline double gaussian_at(std::uint64_t seed, std::uint64_t index) {
    return quantile(uniform_at(seed, index));
}

}  // namespace detail

/// A reproducible rejection-sampling experiment: draw X ~ N(theta_true, 1)
/// (plus W for randomized rules) and keep draws whose statistic passes the
/// selection event, until n_target_accepted are collected.
struct SimulationPlan {
    double theta_true = 0.0;
    SelectionRule rule;
    std::int64_t n_target_accepted = 100000;
    std::uint64_t seed = 1;
    std::int64_t chunk_size = 16384;
    std::int64_t max_raw_draws = 100000000;  // rate < 1e-9 beyond this

    void validate() const {
        if (n_target_accepted < 1) {
            throw std::domain_error("SimulationPlan: n_target_accepted must be >= 1");
        }
        if (chunk_size < 1) {
            throw std::domain_error("SimulationPlan: chunk_size must be >= 1");
        }
        if (max_raw_draws < 1) {
            throw std::domain_error("SimulationPlan: max_raw_draws must be >= 1");
        }
    }
};

struct CoverageReport {
    std::int64_t n_accepted;
    std::int64_t n_covered;
    double coverage;
    double std_error;
};

struct EmpiricalCdf {
    double p;
    double std_error;
    std::int64_t n;
};

struct KsReport {
    std::int64_t n;
    double statistic;
    double critical_value;  // 1% asymptotic: 1.628 / sqrt(n)
    bool pass;
};

class RareEventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimulationResult {
    std::vector<double> accepted;
    std::int64_t raw_draws = 0;
};

/// Accepted X values, in draw order.  Draw i consumes counter slots 2i
/// (X) and 2i+1 (W), so the accepted sequence depends only on the seed and
/// the plan, never on how work is chunked.
inline SimulationResult simulate_accepted_detail(const SimulationPlan& plan) {
    plan.validate();

    SimulationResult result;
    result.accepted.reserve(static_cast<std::size_t>(plan.n_target_accepted));
    std::vector<double>& accepted = result.accepted;
    const SelectionRule& rule = plan.rule;
    std::int64_t i = 0;
    while (static_cast<std::int64_t>(accepted.size()) < plan.n_target_accepted) {
        const std::int64_t chunk_end = i + plan.chunk_size;
        for (; i < chunk_end &&
               static_cast<std::int64_t>(accepted.size()) < plan.n_target_accepted;
             ++i) {
            const double x =
                plan.theta_true +
                detail::gaussian_at(plan.seed, 2 * static_cast<std::uint64_t>(i));
            double stat = x;
            if (rule.randomized()) {
                stat += rule.eta * detail::gaussian_at(
                                       plan.seed, 2 * static_cast<std::uint64_t>(i) + 1);
            }
            const bool in_event =
                (rule.kind == RuleKind::OneSided || rule.kind == RuleKind::RandomizedOneSided)
                    ? stat >= rule.c
                    : std::abs(stat) >= rule.c;
            if (in_event) accepted.push_back(x);
        }
        if (i >= plan.max_raw_draws &&
            static_cast<double>(accepted.size()) < 1e-9 * static_cast<double>(i)) {
            throw RareEventError("simulate_accepted: selection event too rare (acceptance "
                                 "estimate below 1e-9 after " +
                                 std::to_string(i) + " draws)");
        }
    }
    result.raw_draws = i;
    return result;
}

inline std::vector<double> simulate_accepted(const SimulationPlan& plan) {
    return simulate_accepted_detail(plan).accepted;
}

/// Fraction of accepted draws at or below a, with binomial standard error.
inline EmpiricalCdf empirical_conditional_cdf(double a, const SimulationPlan& plan) {
    const std::vector<double> xs = simulate_accepted(plan);
    std::int64_t hits = 0;
    for (double x : xs) {
        if (x <= a) ++hits;
    }
    const double n = static_cast<double>(xs.size());
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(p * (1.0 - p) / n), static_cast<std::int64_t>(xs.size())};
}

/// Solver profile for per-draw interval construction: bound accuracy of
/// 1e-5 leaves coverage estimates unbiased far below Monte Carlo noise.
inline SolveConfig coverage_solve_config() {
    return {1e-5, 1e-5, 200, 10.0, 200};
}

/// Conditional coverage: build the interval for every accepted draw and
/// count how often it contains theta_true.  kind selects the conditional
/// construction or the conventional interval that ignores selection.
/// Draws are checked in parallel ranges; the covered count is a plain sum,
/// so the report does not depend on the thread count.
inline CoverageReport coverage(const SimulationPlan& plan, double alpha,
                               IntervalKind kind = IntervalKind::Conditional,
                               const SolveConfig& cfg = coverage_solve_config()) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw std::domain_error("coverage: alpha must lie in (0, 0.5)");
    }
    const std::vector<double> xs = simulate_accepted(plan);

    const auto count_range = [&](std::size_t begin, std::size_t end) {
        std::int64_t covered = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const double x = xs[k];
            ConfidenceInterval ci{};
            if (kind == IntervalKind::Conditional) {
                try {
                    ci = confidence_interval({x, plan.rule, alpha}, cfg);
                } catch (const SolveError& e) {
                    throw SolveError("coverage: draw x=" + std::to_string(x) + ": " +
                                     e.what());
                }
            } else {
                ci = conventional_interval(x, alpha);
            }
            if (ci.contains(plan.theta_true)) ++covered;
        }
        return covered;
    };

    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                       xs.size() / 1024 + 1));
    std::int64_t covered = 0;
    if (n_threads <= 1) {
        covered = count_range(0, xs.size());
    } else {
        std::vector<std::int64_t> partial(n_threads, 0);
        std::vector<std::exception_ptr> errors(n_threads);
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        const std::size_t stride = (xs.size() + n_threads - 1) / n_threads;
        for (std::size_t t = 0; t < n_threads; ++t) {
            workers.emplace_back([&, t] {
                const std::size_t begin = t * stride;
                const std::size_t end = std::min(xs.size(), begin + stride);
                try {
                    partial[t] = count_range(begin, end);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        for (std::int64_t c : partial) covered += c;
    }

    const double n = static_cast<double>(xs.size());
    const double cov = static_cast<double>(covered) / n;
    return {static_cast<std::int64_t>(xs.size()), covered, cov,
            std::sqrt(cov * (1.0 - cov) / n)};
}

/// Kolmogorov-Smirnov distance between the values u_i = F(x_i; theta_true)
/// over accepted draws and the uniform distribution; valid inference makes
/// the transform uniform on (0, 1).
inline KsReport pit_uniformity(const SimulationPlan& plan) {
    const std::vector<double> xs = simulate_accepted(plan);
    std::vector<double> u;
    u.reserve(xs.size());
    for (double x : xs) {
        u.push_back(conditional_cdf(x, plan.theta_true, plan.rule));
    }
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double hi = (k + 1) / n - u[k];
        const double lo = u[k] - k / n;
        d = std::max({d, hi, lo});
    }
    const double crit = 1.628 / std::sqrt(n);
    return {static_cast<std::int64_t>(u.size()), d, crit, d < crit};
}

}  // namespace filedrawer
