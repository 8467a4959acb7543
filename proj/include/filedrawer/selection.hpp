#pragma once

#include <cmath>
#include <stdexcept>

namespace filedrawer {

enum class RuleKind {
    OneSided,            // report when X >= c
    TwoSided,            // report when |X| >= c
    RandomizedOneSided,  // report when X + W >= c,  W ~ N(0, eta^2)
    RandomizedTwoSided,  // report when |X + W| >= c
};

/// The significance event that conditions all downstream inference.
/// c is the critical value of the test; eta is the randomization scale and
/// is only meaningful for the randomized kinds.
struct SelectionRule {
    RuleKind kind = RuleKind::OneSided;
    double c = 1.64;
    double eta = 0.0;

    static SelectionRule one_sided(double c) {
        check_c(c);
        return {RuleKind::OneSided, c, 0.0};
    }
    static SelectionRule two_sided(double c) {
        check_c(c);
        return {RuleKind::TwoSided, c, 0.0};
    }
    static SelectionRule randomized_one_sided(double c, double eta) {
        check_c(c);
        check_eta(eta);
        return {RuleKind::RandomizedOneSided, c, eta};
    }
    static SelectionRule randomized_two_sided(double c, double eta) {
        check_c(c);
        check_eta(eta);
        return {RuleKind::RandomizedTwoSided, c, eta};
    }

    /// Data carving with n1 of n observations used for selection:
    /// eta^2 = n/n1 - 1.  Requires 1 <= n1 < n, so the randomization is
    /// nondegenerate.
    static SelectionRule from_carving(double c, double n, double n1,
                                      RuleKind kind = RuleKind::RandomizedOneSided) {
        if (!(n1 >= 1.0 && n1 < n)) {
            throw std::domain_error("from_carving: need 1 <= n1 < n");
        }
        const double eta = std::sqrt(n / n1 - 1.0);
        if (kind == RuleKind::RandomizedOneSided) return randomized_one_sided(c, eta);
        if (kind == RuleKind::RandomizedTwoSided) return randomized_two_sided(c, eta);
        throw std::domain_error("from_carving: kind must be randomized");
    }

    bool randomized() const {
        return kind == RuleKind::RandomizedOneSided || kind == RuleKind::RandomizedTwoSided;
    }

    /// Whether an observed statistic is inside the conditioning event.
    /// Randomized rules constrain X + W, not X, so any x is admissible.
    bool contains(double x) const {
        switch (kind) {
            case RuleKind::OneSided: return x >= c;
            case RuleKind::TwoSided: return std::abs(x) >= c;
            default: return std::isfinite(x);
        }
    }

private:
    static void check_c(double c) {
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw std::domain_error("SelectionRule: critical value c must be positive");
        }
    }
    static void check_eta(double eta) {
        if (!(eta > 0.0) || !std::isfinite(eta)) {
            throw std::domain_error("SelectionRule: randomization scale eta must be positive");
        }
    }
};

inline const char* to_string(RuleKind k) {
    switch (k) {
        case RuleKind::OneSided: return "one-sided";
        case RuleKind::TwoSided: return "two-sided";
        case RuleKind::RandomizedOneSided: return "rand-one-sided";
        case RuleKind::RandomizedTwoSided: return "rand-two-sided";
    }
    return "?";
}

}  // namespace filedrawer
