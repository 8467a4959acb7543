// Drives the installed CLI binary end to end: exit codes, stream
// separation, CSV byte-determinism, and agreement with direct library
// calls.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "filedrawer/filedrawer.hpp"

namespace fs = std::filesystem;
using Catch::Approx;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path();
    const fs::path out = dir / ("fd_cli_out_" + std::to_string(counter) + ".txt");
    const fs::path err = dir / ("fd_cli_err_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(FILEDRAWER_CLI_PATH) + " " + args + " >" +
                            out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<double> parse_csv_row(const std::string& line) {
    std::vector<double> vals;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    return vals;
}

}  // namespace

TEST_CASE("ci command") {
    SECTION("high significance reproduces the conventional interval") {
        const RunResult r = run_cli("ci --kind one-sided --c 1.64 --x-obs 10");
        REQUIRE(r.exit_code == 0);
        const auto lines = lines_of(r.out);
        REQUIRE(lines.size() == 3);
        double lo = 0, hi = 0;
        REQUIRE(std::sscanf(lines[1].c_str(), "conditional_ci %lf %lf", &lo, &hi) == 2);
        CHECK(lo == Approx(8.04).margin(0.01));
        CHECK(hi == Approx(11.96).margin(0.01));

        // no CLI-layer arithmetic: match the library to printing precision
        const auto ci = filedrawer::confidence_interval(
            {10.0, filedrawer::SelectionRule::one_sided(1.64), 0.05});
        CHECK(lo == Approx(ci.lower).margin(1e-9));
        CHECK(hi == Approx(ci.upper).margin(1e-9));
    }
    SECTION("marginal significance warns about the location problem") {
        const RunResult r = run_cli("ci --kind one-sided --c 1.64 --alpha 0.05 --x-obs 1.65");
        REQUIRE(r.exit_code == 0);
        CHECK(r.err.find("location problem") != std::string::npos);
        const auto lines = lines_of(r.out);
        double lo = 0, hi = 0;
        REQUIRE(std::sscanf(lines[1].c_str(), "conditional_ci %lf %lf", &lo, &hi) == 2);
        CHECK(hi < 0.0);
    }
    SECTION("insignificant input exits with the domain code") {
        const RunResult r = run_cli("ci --kind one-sided --c 1.64 --x-obs 1.0");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("not significant") != std::string::npos);
    }
    SECTION("estimate prints only the point estimate") {
        const RunResult r = run_cli("estimate --kind two-sided --c 1.64 --x-obs 2.5");
        REQUIRE(r.exit_code == 0);
        const auto lines = lines_of(r.out);
        REQUIRE(lines.size() == 1);
        double mu = 0;
        REQUIRE(std::sscanf(lines[0].c_str(), "median_unbiased %lf", &mu) == 1);
        CHECK(mu == Approx(filedrawer::median_unbiased(
                        {2.5, filedrawer::SelectionRule::two_sided(1.64), 0.05}))
                        .margin(1e-9));
    }
}

TEST_CASE("curve command") {
    const fs::path csv1 = fs::temp_directory_path() / "fd_fig1_a.csv";
    const fs::path csv2 = fs::temp_directory_path() / "fd_fig1_b.csv";

    SECTION("single-point grid emits one matching row") {
        const RunResult r = run_cli("curve --kind one-sided --c 1.64 --x-obs 2.0");
        REQUIRE(r.exit_code == 0);
        const auto lines = lines_of(r.out);
        REQUIRE(lines.size() == 2);
        CHECK(lines[0] == "x_obs,mu,lo,hi,conv_lo,conv_hi");
        const auto vals = parse_csv_row(lines[1]);
        REQUIRE(vals.size() == 6);
        const filedrawer::InferenceProblem prob{
            2.0, filedrawer::SelectionRule::one_sided(1.64), 0.05};
        CHECK(vals[1] == Approx(filedrawer::median_unbiased(prob)).margin(1e-9));
        const auto ci = filedrawer::confidence_interval(prob);
        CHECK(vals[2] == Approx(ci.lower).margin(1e-9));
        CHECK(vals[3] == Approx(ci.upper).margin(1e-9));
    }

    SECTION("figure1 preset is byte-deterministic with LF endings") {
        REQUIRE(run_cli("curve --preset figure1 --out " + csv1.string()).exit_code == 0);
        REQUIRE(run_cli("curve --preset figure1 --out " + csv2.string()).exit_code == 0);
        const std::string a = slurp(csv1);
        const std::string b = slurp(csv2);
        REQUIRE(!a.empty());
        CHECK(a == b);
        CHECK(a.find('\r') == std::string::npos);

        const auto lines = lines_of(a);
        CHECK(lines[0] == "x_obs,mu,lo,hi,conv_lo,conv_hi");
        const auto last = parse_csv_row(lines.back());
        CHECK(last[0] == Approx(6.0));
        CHECK(std::abs(last[1] - last[0]) < 1e-3);
        fs::remove(csv1);
        fs::remove(csv2);
    }

    SECTION("figure2 preset stays within a tight band of the diagonal") {
        const RunResult r = run_cli("curve --preset figure2");
        REQUIRE(r.exit_code == 0);
        const auto lines = lines_of(r.out);
        REQUIRE(lines.size() > 100);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto v = parse_csv_row(lines[i]);
            for (double col : v) REQUIRE(col > -10.0);
        }
    }

    SECTION("two-sided grids report skipped points") {
        const RunResult r = run_cli(
            "curve --kind two-sided --c 1.64 --grid-min -2 --grid-max 2 --grid-step 1");
        REQUIRE(r.exit_code == 0);
        CHECK(r.err.find("skipped 3") != std::string::npos);
        CHECK(lines_of(r.out).size() == 3);  // header + rows for -2 and 2
    }
}

TEST_CASE("coverage command") {
    SECTION("reports are reproducible for a fixed seed") {
        const std::string args =
            "coverage --kind one-sided --c 1.64 --theta-true 0 --n 2000 --seed 77";
        const RunResult a = run_cli(args);
        const RunResult b = run_cli(args);
        REQUIRE(a.exit_code == 0);
        CHECK(a.out == b.out);
    }
    SECTION("strict mode passes for the conditional interval") {
        const RunResult r = run_cli(
            "coverage --kind one-sided --c 1.64 --theta-true 0 --n 4000 --seed 7 --strict");
        CHECK(r.exit_code == 0);
    }
    SECTION("strict mode fails for the naive interval") {
        const RunResult r = run_cli(
            "coverage --kind one-sided --c 1.64 --theta-true 0 --n 4000 --seed 7 --strict "
            "--naive");
        CHECK(r.exit_code == 4);
        CHECK(r.err.find("outside") != std::string::npos);
    }
}

TEST_CASE("thresholds command") {
    const RunResult r = run_cli("thresholds --c 1.64 --p 0.025 0.5");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "p,theta_below_c,theta_below_zero,solver_check");
    const auto row1 = parse_csv_row(lines[1]);
    CHECK(row1[1] == Approx(1.671338).margin(1e-4));
    CHECK(row1[2] == Approx(1.652267).margin(1e-4));
    CHECK(lines[1].find("ok") != std::string::npos);
    const auto row2 = parse_csv_row(lines[2]);
    CHECK(row2[1] > row1[1]);
    CHECK(row2[2] > row1[2]);
    CHECK(lines[2].find("ok") != std::string::npos);
}

TEST_CASE("selfcheck command (quick)") {
    const RunResult r = run_cli("selfcheck --quick --json");
    // the battery's 1.66 reference for the negativity threshold is a
    // two-decimal rounding; the exact formula gives 1.6523, so exactly one
    // check reports a discrepancy
    CHECK(r.exit_code == 4);
    const nlohmann::json report = nlohmann::json::parse(r.out);
    REQUIRE(report.is_array());
    REQUIRE(report.size() > 20);
    std::vector<std::string> failing;
    for (const auto& item : report) {
        REQUIRE(item.contains("name"));
        REQUIRE(item.contains("expected"));
        REQUIRE(item.contains("observed"));
        REQUIRE(item.contains("tolerance"));
        REQUIRE(item.contains("pass"));
        if (!item["pass"].get<bool>()) failing.push_back(item["name"].get<std::string>());
    }
    REQUIRE(failing == std::vector<std::string>{"2.value"});
}

TEST_CASE("unknown flags exit with the domain code") {
    CHECK(run_cli("ci --nope 3").exit_code == 2);
    CHECK(run_cli("curve").exit_code == 2);
}
