#pragma once

// Monte Carlo cross-checks: discounted hitting payoffs under fixed priors,
// empirical inf/sup over the prior grid, and convergence-in-capacity
// diagnostics for nested stopping policies.
//
// Hitting is detected by comparing the simulated state with the endpoints of
// the starting component after every step, so estimates carry an O(sqrt(dt))
// discrete-monitoring bias. With the exact-GBM scheme and `adaptive_steps`,
// steps longer than dt are taken only while the path is so far from every
// boundary that an intermediate crossing has probability below 1e-11.

#include "equistop/core_model.hpp"

#include <cstdint>
#include <vector>

namespace equistop {

enum class Scheme { exact_gbm, euler };

const char* to_string(Scheme scheme);

struct SimConfig {
    std::int64_t n_paths = 10000;
    double dt = 1e-3;
    double horizon = 400.0;
    std::uint64_t rng_seed = 20190901;
    Scheme scheme = Scheme::exact_gbm;
    /// Brownian-bridge crossing probability between monitoring dates. When set,
    /// exits are recorded at the boundary; otherwise at the simulated state.
    bool bridge_correction = false;
    bool adaptive_steps = true;
    int threads = 0;

    /// Defaults with horizon 20 / r.
    static SimConfig for_objective(const Objective& objective);
    void validate() const;
};

struct HittingEstimate {
    double mean;
    double std_error;
    std::int64_t n_absorbed;
    std::int64_t n_censored;
};

/// Estimates E_theta[exp(-r rho_R) g(X_rho_R)] from x. Paths that have not
/// entered R by the horizon contribute 0. Throws InvalidInput when x is in R.
HittingEstimate estimate_hitting_value(double x, const GridPolicy& policy,
                                       const PriorFamily& priors, const ParamPoint& theta,
                                       const Objective& objective, const SimConfig& config);

struct MaxminEstimate {
    std::vector<ParamPoint> priors;
    std::vector<HittingEstimate> per_prior;
    std::size_t argmin;
    std::size_t argmax;
    double inf_value;
    double sup_value;
    double value;      // alpha inf + (1 - alpha) sup
    double std_error;  // alpha se_inf + (1 - alpha) se_sup
};

/// Runs estimate_hitting_value on every sampled prior with common random
/// numbers and combines the extremes.
MaxminEstimate empirical_maxmin(double x, const GridPolicy& policy, const PriorFamily& priors,
                                const Objective& objective, const SimConfig& config);

struct CapacityRow {
    std::size_t n;                // 1-based position in the policy sequence
    double sup_freq_time;         // max over sampled theta of P(|rho^n - rho^0| >= eps)
    double sup_freq_state;        // max over sampled theta of P(|X_rho^n - X_rho^0| 1{rho^n < inf} >= eps)
    ParamPoint argsup_time;
    ParamPoint argsup_state;
};

struct CapacityReport {
    std::vector<CapacityRow> rows;
    /// Paths where a hitting time increased along the nested sequence. Always
    /// zero unless the simulator is broken; checked and reported.
    std::int64_t monotonicity_violations = 0;
    std::int64_t paths_checked = 0;
};

/// Hitting times of every policy in a nondecreasing sequence (and of its last,
/// largest element R^0) along the same trajectories. Times of paths that are
/// still running at the horizon are taken as the horizon itself.
CapacityReport capacity_diagnostic(double x, const std::vector<GridPolicy>& policies,
                                   const PriorFamily& priors, const Objective& objective,
                                   const SimConfig& config, double epsilon);

/// Documented size of the discrete-monitoring bias for the put under GBM:
/// twice the change of (K - a')(a'/x)^m when the barrier moves from a to
/// a' = a exp(-0.5826 sigma sqrt(dt)), the classical continuity correction.
double put_monitoring_bias_bound(double x, double a, double strike, double discount, double sigma,
                                 double dt);

}  // namespace equistop
