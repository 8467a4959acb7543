#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "filedrawer/inference.hpp"
#include "filedrawer/montecarlo.hpp"
#include "filedrawer/solve.hpp"

using Catch::Approx;
using namespace filedrawer;

namespace {
constexpr double kC = 1.64;
const SelectionRule kOneSided = SelectionRule::one_sided(kC);

std::vector<SelectionRule> all_rules() {
    return {SelectionRule::one_sided(kC), SelectionRule::two_sided(kC),
            SelectionRule::randomized_one_sided(kC, 1.0),
            SelectionRule::randomized_two_sided(kC, 1.0)};
}
}  // namespace

TEST_CASE("quantile solutions at the documented anchors") {
    // at x_obs = c + 0.031 the 0.025-quantile solution sits at c
    CHECK(solve_theta(0.025, 1.671, kOneSided).theta == Approx(kC).margin(0.02));
    // at the exact negativity threshold the 0.025-quantile solution crosses 0
    const double x0 = threshold_upper_below_zero(0.025, kC);
    CHECK(solve_theta(0.025, x0, kOneSided).theta == Approx(0.0).margin(1e-3));
}

TEST_CASE("solutions satisfy the defining equation") {
    for (const auto& rule : all_rules()) {
        for (double p : {0.025, 0.3, 0.5, 0.9, 0.975}) {
            for (double x : {1.9, 3.0, 5.5}) {
                const QuantileSolution sol = solve_theta(p, x, rule);
                CHECK(conditional_cdf(x, sol.theta, rule) == Approx(p).margin(1e-8));
                CHECK((std::abs(sol.achieved_p - p) <= 1e-10 ||
                       sol.bracket.second - sol.bracket.first <= 1e-9));
                CHECK(sol.iterations <= 200);
            }
        }
    }
}

TEST_CASE("theta(p) is strictly decreasing in p") {
    for (const auto& rule : all_rules()) {
        const double x = 2.5;
        double prev = std::numeric_limits<double>::infinity();
        for (double p : {0.025, 0.1, 0.5, 0.9, 0.975}) {
            const double t = solve_theta(p, x, rule).theta;
            REQUIRE(t < prev);
            prev = t;
        }
    }
}

TEST_CASE("theta(p) is nondecreasing in x_obs") {
    for (const auto& rule : all_rules()) {
        double prev = -std::numeric_limits<double>::infinity();
        for (double x = 1.66; x <= 5.0; x += 0.25) {
            const double t = solve_theta(0.5, x, rule).theta;
            REQUIRE(t >= prev);
            prev = t;
        }
    }
}

TEST_CASE("one-sided translation equivariance") {
    for (double t : {-1.0, 2.5}) {
        for (double p : {0.1, 0.5, 0.9}) {
            const double base = solve_theta(p, 2.2, kOneSided).theta;
            const double shifted =
                solve_theta(p, 2.2 + t, SelectionRule::one_sided(kC + t)).theta;
            CHECK(shifted == Approx(base + t).margin(1e-6));
        }
    }
}

TEST_CASE("high significance converges to the conventional solution") {
    for (double p : {0.025, 0.5, 0.975}) {
        CHECK(std::abs(solve_theta(p, 10.0, kOneSided).theta - conventional_theta(p, 10.0)) <
              1e-3);
    }
}

TEST_CASE("marginal significance diverges without clamping") {
    for (double p : {0.025, 0.5, 0.975}) {
        const double t1 = solve_theta(p, kC + 1e-2, kOneSided).theta;
        const double t2 = solve_theta(p, kC + 1e-3, kOneSided).theta;
        const double t3 = solve_theta(p, kC + 1e-4, kOneSided).theta;
        REQUIRE(std::isfinite(t3));
        CHECK(t1 - t2 >= 1.0);
        CHECK(t2 - t3 >= 1.0);
    }
}

TEST_CASE("solver input validation") {
    CHECK_THROWS_AS(solve_theta(0.0, 2.0, kOneSided), std::domain_error);
    CHECK_THROWS_AS(solve_theta(1.0, 2.0, kOneSided), std::domain_error);
    CHECK_THROWS_AS(solve_theta(0.5, 1.0, kOneSided), std::domain_error);
    CHECK_THROWS_AS(solve_theta(0.5, 0.3, SelectionRule::two_sided(kC)), std::domain_error);
    // randomized rules place no event restriction on x_obs
    CHECK_NOTHROW(solve_theta(0.5, 0.3, SelectionRule::randomized_one_sided(kC, 1.0)));
}

TEST_CASE("bracketing failure is reported, not clamped") {
    SolveConfig cfg;
    cfg.max_bracket_expansions = 0;
    cfg.initial_bracket_halfwidth = 0.25;
    // the root lies far left of x - 0.25 here
    CHECK_THROWS_AS(solve_theta(0.975, kC + 1e-3, kOneSided, cfg), SolveError);
    CHECK_THROWS_WITH(solve_theta(0.975, kC + 1e-3, kOneSided, cfg),
                      Catch::Matchers::ContainsSubstring("no sign change"));
}

TEST_CASE("randomized roundtrip at default tolerances") {
    const std::uint64_t seed = 99;
    for (int i = 0; i < 40; ++i) {
        const SelectionRule rule = all_rules()[i % 4];
        const double u1 = detail::uniform_at(seed, 2 * i);
        const double u2 = detail::uniform_at(seed, 2 * i + 1);
        const double x = kC + 0.01 + 5.0 * u1;
        const double p = 0.01 + 0.98 * u2;
        const QuantileSolution sol = solve_theta(p, x, rule);
        INFO("rule=" << to_string(rule.kind) << " x=" << x << " p=" << p);
        CHECK(std::abs(conditional_cdf(x, sol.theta, rule) - p) < 1e-8);
    }
}

TEST_CASE("conventional solution") {
    CHECK(conventional_theta(0.5, 3.3) == Approx(3.3).margin(1e-12));
    CHECK(conventional_theta(0.025, 2.0) == Approx(3.96).margin(1e-2));
    CHECK(conventional_theta(0.975, 2.0) == Approx(0.04).margin(1e-2));
    double prev = std::numeric_limits<double>::infinity();
    for (double p = 0.05; p < 1.0; p += 0.05) {
        const double t = conventional_theta(p, 1.0);
        REQUIRE(t < prev);
        prev = t;
    }
    CHECK_THROWS_AS(conventional_theta(0.0, 1.0), std::domain_error);
}
