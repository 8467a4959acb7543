#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "filedrawer/inference.hpp"
#include "filedrawer/montecarlo.hpp"

namespace filedrawer {

struct SelfCheckOptions {
    bool quick = false;  // divide Monte Carlo sample sizes by 10
    std::uint64_t seed = 12345;
};

struct CheckLine {
    int criterion;
    std::string name;
    double expected;
    double observed;
    double tolerance;
    bool pass;
};

struct CriterionSummary {
    int id;
    std::string title;
    bool pass;
    double seconds;
};

struct SelfCheckReport {
    std::vector<CheckLine> lines;
    std::vector<CriterionSummary> criteria;
    bool all_pass = false;
};

namespace detail {

template <class F>
std::pair<double, double> golden_max(const F& f, double lo, double hi, double tol = 1e-6) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

class SelfCheckRunner {
public:
    explicit SelfCheckRunner(const SelfCheckOptions& opts) : opts_(opts) {}

    SelfCheckReport run() {
        run_criterion(1, "threshold to c", [this] { criterion_threshold_c(); });
        run_criterion(2, "negativity threshold", [this] { criterion_threshold_zero(); });
        run_criterion(3, "divergence at the margin", [this] { criterion_divergence(); });
        run_criterion(4, "convergence to conventional", [this] { criterion_convergence(); });
        run_criterion(5, "two-sided margin behavior", [this] { criterion_two_sided_margin(); });
        run_criterion(6, "two-sided lower-bound gap", [this] { criterion_lower_gap(); });
        run_criterion(7, "randomized vs two-sided length", [this] { criterion_length_gap(); });
        run_criterion(8, "randomized one-sided stability", [this] { criterion_stability(); });
        run_criterion(9, "conditional coverage", [this] { criterion_coverage(); });
        run_criterion(10, "analytic vs empirical CDFs", [this] { criterion_oracle(); });
        run_criterion(11, "PIT uniformity", [this] { criterion_pit(); });
        run_criterion(12, "quantile roundtrip", [this] { criterion_roundtrip(); });

        report_.all_pass = true;
        for (const auto& c : report_.criteria) report_.all_pass = report_.all_pass && c.pass;
        return report_;
    }

private:
    static constexpr double kC = 1.64;
    static constexpr double kEta = 1.0;

    SelfCheckOptions opts_;
    SelfCheckReport report_;
    int current_ = 0;

    std::int64_t mc_n(std::int64_t full) const { return opts_.quick ? full / 10 : full; }
    std::uint64_t stream(std::uint64_t tag) const { return splitmix64_at(opts_.seed, tag); }

    template <class Body>
    void run_criterion(int id, const std::string& title, const Body& body) {
        current_ = id;
        const std::size_t first_line = report_.lines.size();
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            report_.lines.push_back({id, std::string("exception: ") + e.what(), 1.0, 0.0, 0.0, false});
        }
        const auto t1 = std::chrono::steady_clock::now();
        bool pass = true;
        for (std::size_t i = first_line; i < report_.lines.size(); ++i) {
            pass = pass && report_.lines[i].pass;
        }
        report_.criteria.push_back(
            {id, title, pass, std::chrono::duration<double>(t1 - t0).count()});
    }

    void band(const std::string& name, double expected, double observed, double tol) {
        const bool ok = std::isfinite(observed) && std::abs(observed - expected) <= tol;
        report_.lines.push_back({current_, name, expected, observed, tol, ok});
    }
    void less_than(const std::string& name, double observed, double limit) {
        const bool ok = std::isfinite(observed) && observed < limit;
        report_.lines.push_back({current_, name, limit, observed, 0.0, ok});
    }
    void at_least(const std::string& name, double observed, double limit) {
        const bool ok = std::isfinite(observed) && observed >= limit;
        report_.lines.push_back({current_, name, limit, observed, 0.0, ok});
    }
    void boolean(const std::string& name, bool ok) {
        report_.lines.push_back({current_, name, 1.0, ok ? 1.0 : 0.0, 0.0, ok});
    }

    static double theta_at(double p, double x, const SelectionRule& rule) {
        return solve_theta(p, x, rule).theta;
    }

    void criterion_threshold_c() {
        const double thr = threshold_upper_below_c(0.025, kC);
        band("value_minus_c", 0.031, thr - kC, 0.002);
        const SelectionRule rule = SelectionRule::one_sided(kC);
        const bool below = theta_at(0.025, thr - 0.01, rule) < kC;
        const bool above = theta_at(0.025, thr + 0.01, rule) >= kC;
        boolean("solver_flip_across_c", below && above);
    }

    void criterion_threshold_zero() {
        const double thr = threshold_upper_below_zero(0.025, kC);
        band("value", 1.66, thr, 0.005);
        const ConfidenceInterval ci =
            confidence_interval({1.65, SelectionRule::one_sided(kC), 0.05});
        less_than("ci_upper_at_x1.65", ci.upper, 0.0);
        const bool below = theta_at(0.025, thr - 0.01, SelectionRule::one_sided(kC)) < 0.0;
        const bool above = theta_at(0.025, thr + 0.01, SelectionRule::one_sided(kC)) >= 0.0;
        boolean("solver_flip_across_zero", below && above);
    }

    void criterion_divergence() {
        const SelectionRule rule = SelectionRule::one_sided(kC);
        bool solver_ok = true;
        for (double p : {0.025, 0.5, 0.975}) {
            try {
                const double t1 = theta_at(p, kC + 1e-2, rule);
                const double t2 = theta_at(p, kC + 1e-3, rule);
                const double t3 = theta_at(p, kC + 1e-4, rule);
                at_least("min_drop_p" + format_p(p), std::min(t1 - t2, t2 - t3), 1.0);
                boolean("finite_p" + format_p(p),
                        std::isfinite(t1) && std::isfinite(t2) && std::isfinite(t3));
            } catch (const SolveError&) {
                solver_ok = false;
            }
        }
        boolean("no_solver_failure", solver_ok);
    }

    void criterion_convergence() {
        const SelectionRule rule = SelectionRule::one_sided(kC);
        for (double p : {0.025, 0.5, 0.975}) {
            const double gap = std::abs(theta_at(p, 10.0, rule) - conventional_theta(p, 10.0));
            band("gap_p" + format_p(p), 0.0, gap, 1e-3);
        }
    }

    void criterion_two_sided_margin() {
        const InferenceProblem problem{kC + 1e-6, SelectionRule::two_sided(kC), 0.05};
        band("median_at_margin", 0.0, median_unbiased(problem), 1e-3);
        const ConfidenceInterval ci = confidence_interval(problem);
        band("ci_length", 1.77, ci.length(), 0.02);
    }

    void criterion_lower_gap() {
        const SelectionRule rule = SelectionRule::two_sided(kC);
        const double z = quantile(0.975);
        const auto gap = [&](double x) { return (x - z) - theta_at(0.975, x, rule); };
        double best_x = 1.65, best = gap(best_x);
        for (double x = 1.65; x <= 6.0 + 1e-9; x += 0.005) {
            const double g = gap(x);
            if (g > best) {
                best = g;
                best_x = x;
            }
        }
        const auto [xm, gm] = golden_max(gap, best_x - 0.005, best_x + 0.005);
        band("max_gap", 0.847, gm, 0.01);
        band("argmax_x", 2.8, xm, 0.05);
    }

    void criterion_length_gap() {
        const SelectionRule plain = SelectionRule::two_sided(kC);
        const SelectionRule rand = SelectionRule::randomized_two_sided(kC, kEta);
        const auto length_gap = [&](double x) {
            const double len_plain = theta_at(0.025, x, plain) - theta_at(0.975, x, plain);
            const double len_rand = theta_at(0.025, x, rand) - theta_at(0.975, x, rand);
            return len_plain - len_rand;
        };
        double best_x = 2.0, best = length_gap(best_x);
        for (double x : figure_grid(1.65, 6.0, kC)) {
            const double g = length_gap(x);
            if (g > best) {
                best = g;
                best_x = x;
            }
        }
        const auto [xm, gm] = golden_max(length_gap, best_x - 0.01, best_x + 0.01, 1e-4);
        band("max_length_gap", 0.44, gm, 0.01);
        band("argmax_x", 2.76, xm, 0.05);
    }

    void criterion_stability() {
        const SelectionRule rule = SelectionRule::randomized_one_sided(kC, kEta);
        double worst = 0.0;
        for (double x = kC; x <= 6.0 + 1e-9; x += 0.01) {
            const double mu = theta_at(0.5, x, rule);
            const double lo = theta_at(0.975, x, rule);
            const double hi = theta_at(0.025, x, rule);
            worst = std::max({worst, std::abs(mu - x), std::abs(lo - x), std::abs(hi - x)});
        }
        less_than("max_excursion_from_x", worst, 6.0);
    }

    std::vector<SelectionRule> all_rules() const {
        return {SelectionRule::one_sided(kC), SelectionRule::two_sided(kC),
                SelectionRule::randomized_one_sided(kC, kEta),
                SelectionRule::randomized_two_sided(kC, kEta)};
    }

    void criterion_coverage() {
        std::uint64_t tag = 900;
        for (const SelectionRule& rule : all_rules()) {
            for (double theta : {0.0, 2.0}) {
                SimulationPlan plan;
                plan.theta_true = theta;
                plan.rule = rule;
                plan.n_target_accepted = mc_n(100000);
                plan.seed = stream(tag++);
                const CoverageReport rep = coverage(plan, 0.05);
                band(std::string("coverage_") + to_string(rule.kind) + "_theta" +
                         format_p(theta),
                     0.95, rep.coverage, 3.0 * rep.std_error);
            }
        }
    }

    void criterion_oracle() {
        const double thetas[5] = {0.0, 0.5, 1.0, 1.5, 2.0};
        std::uint64_t tag = 1000;
        for (const SelectionRule& rule : all_rules()) {
            std::vector<double> as;
            switch (rule.kind) {
                case RuleKind::OneSided:
                    as = {kC + 0.05, kC + 0.2, kC + 0.5, kC + 1.0, kC + 2.0};
                    break;
                case RuleKind::TwoSided:
                    as = {-kC - 0.3, -kC - 0.05, kC + 0.05, kC + 0.5, kC + 1.5};
                    break;
                default:
                    as = {kC - 1.0, kC - 0.3, kC + 0.2, kC + 0.8, kC + 2.0};
                    break;
            }
            double worst_z = 0.0;
            for (double theta : thetas) {
                SimulationPlan plan;
                plan.theta_true = theta;
                plan.rule = rule;
                plan.n_target_accepted = mc_n(1000000);
                plan.seed = stream(tag++);
                const std::vector<double> xs = simulate_accepted(plan);
                for (double a : as) {
                    std::int64_t hits = 0;
                    for (double x : xs) {
                        if (x <= a) ++hits;
                    }
                    const double n = static_cast<double>(xs.size());
                    const double emp = static_cast<double>(hits) / n;
                    const double f = conditional_cdf(a, theta, rule);
                    const double se = std::sqrt(f * (1.0 - f) / n);
                    worst_z = std::max(worst_z, std::abs(emp - f) / se);
                }
            }
            band(std::string("worst_z_") + to_string(rule.kind), 0.0, worst_z, 3.0);
        }
    }

    void criterion_pit() {
        std::uint64_t tag = 1100;
        for (const SelectionRule& rule : all_rules()) {
            SimulationPlan plan;
            plan.theta_true = 0.0;
            plan.rule = rule;
            plan.n_target_accepted = mc_n(100000);
            plan.seed = stream(tag++);
            const KsReport ks = pit_uniformity(plan);
            report_.lines.push_back({current_, std::string("ks_") + to_string(rule.kind),
                                     0.0, ks.statistic, ks.critical_value, ks.pass});
        }
    }

    void criterion_roundtrip() {
        const std::uint64_t s = stream(1200);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double u1 = uniform_at(s, 3 * static_cast<std::uint64_t>(i));
            const double u2 = uniform_at(s, 3 * static_cast<std::uint64_t>(i) + 1);
            const double u3 = uniform_at(s, 3 * static_cast<std::uint64_t>(i) + 2);
            SelectionRule rule = all_rules()[i % 4];
            double x = kC + 0.01 + 5.99 * u1;
            if (rule.kind == RuleKind::TwoSided && u2 < 0.5) x = -x;
            const double p = 0.01 + 0.98 * u3;
            const QuantileSolution sol = solve_theta(p, x, rule);
            worst = std::max(worst, std::abs(conditional_cdf(x, sol.theta, rule) - p));
        }
        band("worst_roundtrip_residual", 0.0, worst, 1e-8);
    }

    static std::string format_p(double p) {
        std::string s = std::to_string(p);
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
};

}  // namespace detail

/// Runs the whole verification battery and reports every check with its
/// expected value, observed value, and tolerance.
inline SelfCheckReport run_selfcheck(const SelfCheckOptions& opts = {}) {
    return detail::SelfCheckRunner(opts).run();
}

}  // namespace filedrawer
