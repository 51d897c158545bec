#include "equistop/analytic_gbm.hpp"

#include <algorithm>
#include <cmath>

namespace equistop::gbm {

using detail::require;

namespace {

constexpr double kCrossingTol = 1e-10;

void check_band(const Band& b, const char* name) {
    require(std::isfinite(b.low) && std::isfinite(b.high), std::string(name) + " must be finite");
    require(b.low > 0.0 && b.low <= b.high, std::string(name) + " requires 0 < low <= high");
}

double weight(const PutGbmProblem& p, const ExponentPair& m) {
    return m.m1 * p.alpha + m.m2 * (1.0 - p.alpha);
}

// d/dx Lambda(x, a) for x > a.
double lambda_slope(double x, double a, const PutGbmProblem& p, const ExponentPair& m) {
    const double r = a / x;
    return -(p.strike - a) / x *
           (m.m1 * p.alpha * decay_power(r, m.m1) + m.m2 * (1.0 - p.alpha) * decay_power(r, m.m2));
}

// x -> (a/x)^m solves b x u' + sigma^2 x^2 u'' / 2 - r u = 0 with m the
// positive root of sigma^2 m (m + 1) / 2 - b m - r = 0.
double drift_exponent(double b, double sigma, double r) {
    const double s2 = sigma * sigma;
    return std::sqrt(b * b / (s2 * s2) + (2.0 * r - b) / s2 + 0.25) + b / s2 - 0.5;
}

}  // namespace

void PutGbmProblem::validate() const {
    require(std::isfinite(strike) && strike > 0.0, "strike must be positive");
    require(std::isfinite(discount) && discount > 0.0, "discount must be positive");
    check_band(sigma_band, "sigma_band");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    require(!(rate_band && drift_band), "rate_band and drift_band are mutually exclusive");
    if (rate_band) check_band(*rate_band, "rate_band");
    if (drift_band) check_band(*drift_band, "drift_band");
}

Objective PutGbmProblem::objective() const {
    validate();
    return Objective::put(discount, alpha, strike);
}

PriorFamily PutGbmProblem::priors(int samples) const {
    validate();
    const ParamRange sigma{sigma_band.low, sigma_band.high};
    if (rate_band)
        return PriorFamily::gbm_vol_and_rate_band(sigma, {rate_band->low, rate_band->high}, samples);
    if (drift_band)
        return PriorFamily::gbm_vol_and_drift_band(sigma, {drift_band->low, drift_band->high},
                                                   samples);
    return PriorFamily::gbm_vol_band(discount, sigma, samples);
}

const char* to_string(PolicyClass c) {
    return c == PolicyClass::equilibrium ? "equilibrium" : "not-equilibrium";
}

double decay_power(double ratio, double m) {
    const double e = m * std::log(ratio);
    if (e < -700.0) return 0.0;
    return std::exp(e);
}

double discounted_hitting_factor(double x, double a, double r, double sigma) {
    require(a > 0.0 && x > 0.0 && r > 0.0 && sigma > 0.0,
            "hitting factor needs positive x, a, r and sigma");
    require(a <= x, "hitting factor needs a <= x");
    return decay_power(a / x, 2.0 * r / (sigma * sigma));
}

ExponentPair exponents(const PutGbmProblem& problem) {
    problem.validate();
    const double lo = problem.sigma_band.low;
    const double hi = problem.sigma_band.high;
    if (problem.rate_band) {
        return {2.0 * problem.rate_band->high / (lo * lo), 2.0 * problem.rate_band->low / (hi * hi)};
    }
    if (problem.drift_band) {
        return {drift_exponent(problem.drift_band->high, lo, problem.discount),
                drift_exponent(problem.drift_band->low, hi, problem.discount)};
    }
    return {2.0 * problem.discount / (lo * lo), 2.0 * problem.discount / (hi * hi)};
}

double lambda_value(double x, double a, const PutGbmProblem& problem) {
    require(a > 0.0 && a <= x, "lambda needs 0 < a <= x");
    require(a <= problem.strike, "lambda needs a <= K");
    const ExponentPair m = exponents(problem);
    const double r = a / x;
    return (problem.strike - a) *
           (problem.alpha * decay_power(r, m.m1) + (1.0 - problem.alpha) * decay_power(r, m.m2));
}

double lambda_boundary_slope(double a, const PutGbmProblem& problem) {
    require(a > 0.0 && a <= problem.strike, "slope needs 0 < a <= K");
    return -(problem.strike - a) / a * weight(problem, exponents(problem));
}

double a_star(const PutGbmProblem& problem) {
    const double w = weight(problem, exponents(problem));
    return w / (1.0 + w) * problem.strike;
}

double crossing_point(double a, const PutGbmProblem& problem) {
    const double threshold = a_star(problem);
    require(a > 0.0, "crossing point needs a > 0");
    require(a < threshold, "no crossing exists for a >= a*");
    const ExponentPair m = exponents(problem);
    const double K = problem.strike;
    auto gap = [&](double x) { return lambda_value(x, a, problem) - (K - x); };
    auto gap_slope = [&](double x) { return lambda_slope(x, a, problem, m) + 1.0; };

    // The gap is convex on (a, K), zero at a, decreasing there and positive at
    // K: locate its minimum first, then the sign change to the right of it.
    double lo = a;
    double hi = K;
    for (int i = 0; i < 200 && hi - lo > kCrossingTol; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap_slope(mid) < 0.0 ? lo : hi) = mid;
    }
    double left = 0.5 * (lo + hi);
    if (gap(left) >= 0.0) return left;
    double right = K;
    if (gap(right) <= 0.0) throw NumericalFailure("crossing point: no sign change below K");
    for (int i = 0; i < 200 && right - left > kCrossingTol; ++i) {
        const double mid = 0.5 * (left + right);
        (gap(mid) < 0.0 ? left : right) = mid;
    }
    return 0.5 * (left + right);
}

PolicyClass classify_policy(double a, const PutGbmProblem& problem) {
    require(a > 0.0 && a <= problem.strike, "classification needs a in (0, K]");
    return a >= a_star(problem) ? PolicyClass::equilibrium : PolicyClass::not_equilibrium;
}

double optimal_equilibrium(const PutGbmProblem& problem) { return a_star(problem); }

double value_of_equilibrium(double x, double a, const PutGbmProblem& problem) {
    require(a > 0.0 && a <= problem.strike, "value needs a in (0, K]");
    require(x > 0.0, "value needs x > 0");
    const double g = std::max(problem.strike - x, 0.0);
    if (x <= a) return g;
    return std::max(g, lambda_value(x, a, problem));
}

GridPolicy threshold_policy(double a) {
    require(a > 0.0 && std::isfinite(a), "threshold must be positive");
    auto grid = build_grid(StateInterval::positive_half_line(), 3, std::pair{0.5 * a, 1.5 * a});
    return GridPolicy(grid, {true, true, false});
}

GridPolicy snapped_threshold_policy(const GridPtr& grid, double a) {
    const auto points = grid->points();
    const auto it = std::lower_bound(points.begin(), points.end(), a);
    require(it != points.end(), "threshold lies above the grid");
    return GridPolicy::lower_set(grid, *it);
}

}  // namespace equistop::gbm
