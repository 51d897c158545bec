#pragma once

// Closed forms for the put payoff (K - x)^+ under a geometric Brownian motion
// whose volatility (and optionally rate or drift) is only known to lie in a band.

#include "equistop/core_model.hpp"

#include <optional>

namespace equistop::gbm {

struct Band {
    double low;
    double high;
};

/// Decay exponents of the worst-case (m1) and best-case (m2) discounted
/// hitting factors (a/x)^m.
struct ExponentPair {
    double m1;
    double m2;
};

/// Put/GBM problem. At most one of `rate_band` / `drift_band` is set; with
/// neither the drift equals the discount rate.
struct PutGbmProblem {
    double strike;
    double discount;
    Band sigma_band;
    double alpha;
    std::optional<Band> rate_band;
    std::optional<Band> drift_band;

    /// Throws InvalidInput when an invariant fails.
    void validate() const;

    Objective objective() const;
    /// Matching prior family for the numerical engines.
    PriorFamily priors(int samples = 17) const;
};

enum class PolicyClass { equilibrium, not_equilibrium };

const char* to_string(PolicyClass c);

/// E[exp(-r T_a)] = (a/x)^(2r/sigma^2) for a GBM with drift r started at x >= a.
double discounted_hitting_factor(double x, double a, double r, double sigma);

/// (a/x)^m computed in log space; 0 once m ln(a/x) < -700.
double decay_power(double ratio, double m);

ExponentPair exponents(const PutGbmProblem& problem);

/// Lambda(x, a) = (K - a)(alpha (a/x)^m1 + (1 - alpha)(a/x)^m2), the value of
/// the policy (0, a] from x >= a.
double lambda_value(double x, double a, const PutGbmProblem& problem);

/// Right derivative of x -> Lambda(x, a) at x = a.
double lambda_boundary_slope(double a, const PutGbmProblem& problem);

/// (m1 alpha + m2 (1 - alpha)) / (1 + m1 alpha + m2 (1 - alpha)) K.
double a_star(const PutGbmProblem& problem);

/// The unique x* in (a, K) where Lambda(x*, a) = K - x*; requires a < a*.
double crossing_point(double a, const PutGbmProblem& problem);

/// (0, a] is an equilibrium exactly when a >= a*.
PolicyClass classify_policy(double a, const PutGbmProblem& problem);

/// Threshold of the optimal equilibrium (0, a*].
double optimal_equilibrium(const PutGbmProblem& problem);

/// V(x, (0, a]) = max(g(x), J(x, (0, a])).
double value_of_equilibrium(double x, double a, const PutGbmProblem& problem);

/// The policy (0, a] exactly, on the three-point grid {a/2, a, 3a/2}.
GridPolicy threshold_policy(double a);

/// (0, a'] on `grid`, where a' is the first grid point at or above a.
GridPolicy snapped_threshold_policy(const GridPtr& grid, double a);

}  // namespace equistop::gbm
