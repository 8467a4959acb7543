// Command-line front end: selection-adjusted estimates and intervals,
// figure-reproduction CSVs, coverage experiments, and the verification
// battery.  Data goes to stdout (or --out); warnings go to stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "filedrawer/filedrawer.hpp"

namespace {

using namespace filedrawer;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitSolver = 3;
constexpr int kExitStrict = 4;

struct RuleOptions {
    std::string kind = "one-sided";
    double c = 1.64;
    double eta2 = 1.0;
};

void add_rule_options(CLI::App* cmd, RuleOptions& opts) {
    cmd->add_option("--kind", opts.kind, "Selection rule")
        ->check(CLI::IsMember({"one-sided", "two-sided", "rand-one-sided", "rand-two-sided"}))
        ->capture_default_str();
    cmd->add_option("--c", opts.c, "Critical value of the significance test")
        ->capture_default_str();
    cmd->add_option("--eta2", opts.eta2, "Randomization variance eta^2 (randomized kinds)")
        ->capture_default_str();
}

SelectionRule make_rule(const RuleOptions& opts) {
    if (opts.kind == "one-sided") return SelectionRule::one_sided(opts.c);
    if (opts.kind == "two-sided") return SelectionRule::two_sided(opts.c);
    const double eta = std::sqrt(opts.eta2);
    if (opts.kind == "rand-one-sided") return SelectionRule::randomized_one_sided(opts.c, eta);
    return SelectionRule::randomized_two_sided(opts.c, eta);
}

std::string fixed9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw std::runtime_error("cannot open output file: " + path);
    return f;
}

int cmd_ci(const RuleOptions& rule_opts, double x_obs, double alpha, bool estimate_only) {
    const SelectionRule rule = make_rule(rule_opts);
    if (!rule.contains(x_obs)) {
        std::cerr << "error: not significant (x_obs outside the selection event)\n";
        return kExitDomain;
    }
    const InferenceProblem problem{x_obs, rule, alpha};
    const double mu = median_unbiased(problem);
    std::cout << "median_unbiased " << fixed9(mu) << "\n";
    if (estimate_only) return kExitOk;

    const ConfidenceInterval ci = confidence_interval(problem);
    const ConfidenceInterval conv = conventional_interval(x_obs, alpha);
    std::cout << "conditional_ci " << fixed9(ci.lower) << " " << fixed9(ci.upper) << "\n";
    std::cout << "conventional_ci " << fixed9(conv.lower) << " " << fixed9(conv.upper) << "\n";
    if (rule.kind == RuleKind::OneSided && ci.upper < 0.0) {
        std::cerr << "warning: marginal significance: location problem (conditional upper "
                     "bound below zero)\n";
    }
    return kExitOk;
}

int cmd_curve(const RuleOptions& rule_opts_in, double alpha, const std::string& preset,
              double grid_min, double grid_max, double grid_step, double x_obs,
              const std::string& out_path) {
    RuleOptions rule_opts = rule_opts_in;
    if (preset == "figure1") {
        rule_opts.kind = "one-sided";
        rule_opts.c = 1.64;
        grid_min = 1.65;
        grid_max = 6.0;
        grid_step = 0.0;
    } else if (preset == "figure2") {
        rule_opts.kind = "rand-one-sided";
        rule_opts.c = 1.64;
        rule_opts.eta2 = 1.0;
        grid_min = 1.64;
        grid_max = 6.0;
        grid_step = 0.0;
    } else if (preset == "figure3") {
        rule_opts.kind = "two-sided";
        rule_opts.c = 1.64;
        grid_min = 1.65;
        grid_max = 6.0;
        grid_step = 0.0;
    }

    const SelectionRule rule = make_rule(rule_opts);
    std::vector<double> grid;
    if (!std::isnan(grid_min) && !std::isnan(grid_max)) {
        if (grid_step > 0.0) {
            for (double x = grid_min; x <= grid_max + 1e-12; x += grid_step) {
                grid.push_back(std::min(x, grid_max));
            }
        } else {
            grid = figure_grid(grid_min, grid_max, rule.c);
        }
    } else if (!std::isnan(x_obs)) {
        grid.push_back(x_obs);
    } else {
        throw std::domain_error("curve: provide --preset, --grid-min/--grid-max, or --x-obs");
    }

    std::size_t skipped = 0;
    const std::vector<CurveRow> rows = curve({grid.front(), rule, alpha}, grid, {}, &skipped);
    if (skipped > 0) {
        std::cerr << "note: skipped " << skipped
                  << " grid point(s) outside the selection event\n";
    }

    auto file = open_out(out_path);
    std::ostream& os = file ? *file : std::cout;
    os << "x_obs,mu,lo,hi,conv_lo,conv_hi\n";
    for (const CurveRow& r : rows) {
        os << fixed9(r.x_obs) << ',' << fixed9(r.mu) << ',' << fixed9(r.lo) << ','
           << fixed9(r.hi) << ',' << fixed9(r.conv_lo) << ',' << fixed9(r.conv_hi) << '\n';
    }
    return kExitOk;
}

int cmd_coverage(const RuleOptions& rule_opts, double alpha, double theta_true,
                 std::int64_t n, std::uint64_t seed, bool strict, bool naive,
                 const std::string& out_path) {
    SimulationPlan plan;
    plan.theta_true = theta_true;
    plan.rule = make_rule(rule_opts);
    plan.n_target_accepted = n;
    plan.seed = seed;
    const CoverageReport rep =
        coverage(plan, alpha, naive ? IntervalKind::Conventional : IntervalKind::Conditional);

    auto file = open_out(out_path);
    std::ostream& os = file ? *file : std::cout;
    os << "n_accepted,n_covered,coverage,std_error\n";
    os << rep.n_accepted << ',' << rep.n_covered << ',' << fixed9(rep.coverage) << ','
       << fixed9(rep.std_error) << '\n';

    if (strict) {
        const double target = 1.0 - alpha;
        if (std::abs(rep.coverage - target) > 3.0 * rep.std_error) {
            std::cerr << "strict: coverage " << fixed9(rep.coverage) << " outside " << target
                      << " +- 3 SE\n";
            return kExitStrict;
        }
    }
    return kExitOk;
}

int cmd_thresholds(double c, const std::vector<double>& ps) {
    const SelectionRule rule = SelectionRule::one_sided(c);
    std::cout << "p,theta_below_c,theta_below_zero,solver_check\n";
    for (double p : ps) {
        const double thr_c = threshold_upper_below_c(p, c);
        const double thr_0 = threshold_upper_below_zero(p, c);
        const bool flip_c = solve_theta(p, thr_c - 0.01, rule).theta < c &&
                            solve_theta(p, thr_c + 0.01, rule).theta >= c;
        const bool flip_0 = solve_theta(p, thr_0 - 0.01, rule).theta < 0.0 &&
                            solve_theta(p, thr_0 + 0.01, rule).theta >= 0.0;
        std::cout << fixed9(p) << ',' << fixed9(thr_c) << ',' << fixed9(thr_0) << ','
                  << ((flip_c && flip_0) ? "ok" : "FAIL") << '\n';
    }
    return kExitOk;
}

int cmd_selfcheck(bool quick, bool json, std::uint64_t seed, const std::string& out_path) {
    SelfCheckOptions opts;
    opts.quick = quick;
    opts.seed = seed;
    const SelfCheckReport report = run_selfcheck(opts);

    auto file = open_out(out_path);
    std::ostream& os = file ? *file : std::cout;
    if (json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const CheckLine& line : report.lines) {
            arr.push_back({{"name", std::to_string(line.criterion) + "." + line.name},
                           {"expected", line.expected},
                           {"observed", line.observed},
                           {"tolerance", line.tolerance},
                           {"pass", line.pass}});
        }
        os << arr.dump(2) << "\n";
    } else {
        for (const CriterionSummary& c : report.criteria) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%6.2fs", c.seconds);
            os << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.title << " (" << buf
               << ")\n";
            if (!c.pass) {
                for (const CheckLine& line : report.lines) {
                    if (line.criterion == c.id && !line.pass) {
                        os << "       " << line.name << ": expected " << line.expected
                           << " +- " << line.tolerance << ", observed " << line.observed
                           << "\n";
                    }
                }
            }
        }
        os << (report.all_pass ? "all criteria passed\n" : "some criteria FAILED\n");
    }
    return report.all_pass ? kExitOk : kExitStrict;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selection-adjusted inference for statistics reported only when significant"};
    app.require_subcommand(1);

    RuleOptions rule_opts;
    double alpha = 0.05;
    double x_obs = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 12345;
    std::string out_path;

    auto* ci = app.add_subcommand("ci", "Median-unbiased estimate and confidence intervals");
    add_rule_options(ci, rule_opts);
    ci->add_option("--alpha", alpha, "1 - confidence level")->capture_default_str();
    ci->add_option("--x-obs", x_obs, "Observed t-statistic")->required();

    auto* est = app.add_subcommand("estimate", "Median-unbiased estimate only");
    add_rule_options(est, rule_opts);
    est->add_option("--alpha", alpha)->capture_default_str();
    est->add_option("--x-obs", x_obs, "Observed t-statistic")->required();

    auto* curve_cmd = app.add_subcommand("curve", "Estimate and bounds across a grid (CSV)");
    add_rule_options(curve_cmd, rule_opts);
    curve_cmd->add_option("--alpha", alpha)->capture_default_str();
    std::string preset;
    double grid_min = std::numeric_limits<double>::quiet_NaN();
    double grid_max = std::numeric_limits<double>::quiet_NaN();
    double grid_step = 0.0;
    curve_cmd->add_option("--preset", preset, "figure1|figure2|figure3")
        ->check(CLI::IsMember({"figure1", "figure2", "figure3"}));
    curve_cmd->add_option("--grid-min", grid_min, "Grid start");
    curve_cmd->add_option("--grid-max", grid_max, "Grid end");
    curve_cmd->add_option("--grid-step", grid_step,
                          "Grid step (0 = fine stepping near the margin)");
    curve_cmd->add_option("--x-obs", x_obs, "Single-point grid");
    curve_cmd->add_option("--out", out_path, "Output CSV path (default stdout)");

    auto* cov = app.add_subcommand("coverage", "Monte Carlo conditional coverage");
    add_rule_options(cov, rule_opts);
    cov->add_option("--alpha", alpha)->capture_default_str();
    double theta_true = 0.0;
    std::int64_t n_accepted = 100000;
    bool strict = false;
    bool naive = false;
    cov->add_option("--theta-true", theta_true, "True parameter value")->capture_default_str();
    cov->add_option("--n", n_accepted, "Accepted draws to collect")->capture_default_str();
    cov->add_option("--seed", seed, "RNG seed")->capture_default_str();
    cov->add_flag("--strict", strict, "Exit 4 unless coverage is within 3 SE of 1 - alpha");
    cov->add_flag("--naive", naive, "Check the conventional interval instead");
    cov->add_option("--out", out_path, "Output CSV path (default stdout)");

    auto* thr = app.add_subcommand("thresholds", "Analytic location thresholds per p");
    double thr_c = 1.64;
    std::vector<double> ps{0.025, 0.5};
    thr->add_option("--c", thr_c, "Critical value")->capture_default_str();
    thr->add_option("--p", ps, "Quantile levels")->capture_default_str();

    auto* self = app.add_subcommand("selfcheck", "Run the verification battery");
    bool quick = false;
    bool json = false;
    self->add_flag("--quick", quick, "Reduce Monte Carlo sizes 10x");
    self->add_flag("--json", json, "Machine-readable report");
    self->add_option("--seed", seed, "RNG seed")->capture_default_str();
    self->add_option("--out", out_path, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
        if (ci->parsed()) return cmd_ci(rule_opts, x_obs, alpha, false);
        if (est->parsed()) return cmd_ci(rule_opts, x_obs, alpha, true);
        if (curve_cmd->parsed()) {
            return cmd_curve(rule_opts, alpha, preset, grid_min, grid_max, grid_step, x_obs,
                             out_path);
        }
        if (cov->parsed()) {
            return cmd_coverage(rule_opts, alpha, theta_true, n_accepted, seed, strict, naive,
                                out_path);
        }
        if (thr->parsed()) return cmd_thresholds(thr_c, ps);
        if (self->parsed()) return cmd_selfcheck(quick, json, seed, out_path);
        return kExitDomain;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitDomain;
    } catch (const filedrawer::RareEventError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const filedrawer::SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}
