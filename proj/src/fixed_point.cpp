#include "equistop/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace equistop {

using detail::require;

double resolve_tie_tol(const FixedPointConfig& config, const Objective& objective) {
    return config.tie_tol < 0.0 ? default_tie_tol(objective) : config.tie_tol;
}

GridPolicy theta(const GridPolicy& policy, const Objective& objective, const PriorFamily& priors,
                 const FixedPointConfig& config, ComponentCache* cache) {
    const ValueProfile profile = alpha_maxmin_value(policy, objective, priors, config.engine, cache);
    const RegionMasks regions =
        split_regions(profile, policy, objective, resolve_tie_tol(config, objective));
    std::vector<bool> mask(policy.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = regions.stop[i] || (regions.indifferent[i] && policy[i]);
    GridPolicy out(policy.grid_ptr(), std::move(mask));
    if (!out.includes(policy))
        throw NumericalFailure("theta dropped a state of its input policy");
    return out;
}

IterationTrace iterate_to_equilibrium(const GridPolicy& seed, const Objective& objective,
                                      const PriorFamily& priors, int max_iter,
                                      const FixedPointConfig& config) {
    require(max_iter >= 1, "max_iter must be at least 1");
    IterationTrace trace;
    trace.policies.push_back(seed);
    trace.added.push_back(0);
    ComponentCache cache;
    for (int k = 0; k < max_iter; ++k) {
        const GridPolicy& current = trace.policies.back();
        GridPolicy next = theta(current, objective, priors, config, &cache);
        const std::size_t added = next.count() - current.count();
        const bool fixed = next == current;
        trace.policies.push_back(std::move(next));
        trace.added.push_back(added);
        if (fixed) {
            trace.converged_step = static_cast<std::size_t>(k);
            return trace;
        }
    }
    std::ostringstream os;
    os << "no fixed point after " << max_iter << " applications of theta";
    throw NonConvergence(os.str(), std::move(trace));
}

const char* to_string(ViolationKind kind) {
    return kind == ViolationKind::stop_outside_policy ? "stop-outside-policy"
                                                      : "continue-inside-policy";
}

EquilibriumCheck is_equilibrium(const GridPolicy& policy, const Objective& objective,
                                const PriorFamily& priors, const FixedPointConfig& config) {
    const ValueProfile profile = alpha_maxmin_value(policy, objective, priors, config.engine);
    const RegionMasks regions =
        split_regions(profile, policy, objective, resolve_tie_tol(config, objective));
    EquilibriumCheck check{true, {}};
    const StateGrid& grid = policy.grid();
    for (std::size_t i = 0; i < policy.size(); ++i) {
        if (!policy[i] && regions.stop[i]) {
            check.violations.push_back({i, grid[i], ViolationKind::stop_outside_policy});
        } else if (policy[i] && regions.cont[i]) {
            check.violations.push_back({i, grid[i], ViolationKind::continue_inside_policy});
        }
    }
    check.equilibrium = check.violations.empty();
    return check;
}

const char* to_string(Dominance d) {
    switch (d) {
        case Dominance::a_dominates: return "a-dominates";
        case Dominance::b_dominates: return "b-dominates";
        case Dominance::equal: return "equal";
        case Dominance::incomparable: return "incomparable";
    }
    return "unknown";
}

DominanceReport compare_equilibria(const GridPolicy& policy_a, const GridPolicy& policy_b,
                                   const Objective& objective, const PriorFamily& priors,
                                   const FixedPointConfig& config) {
    require(policy_a.grid_ptr() == policy_b.grid_ptr(), "policies must share a grid");
    require(is_equilibrium(policy_a, objective, priors, config).equilibrium,
            "policy a is not an equilibrium");
    require(is_equilibrium(policy_b, objective, priors, config).equilibrium,
            "policy b is not an equilibrium");
    const double tol = resolve_tie_tol(config, objective);
    const ValueProfile va = alpha_maxmin_value(policy_a, objective, priors, config.engine);
    const ValueProfile vb = alpha_maxmin_value(policy_b, objective, priors, config.engine);

    const StateGrid& grid = policy_a.grid();
    DominanceReport report{Dominance::equal, {}, {}, {}, 0.0};
    double lowest = kInfinity;
    double highest = -kInfinity;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double g = objective.payoff(grid[i]);
        report.value_a.push_back(std::max(g, va.value[i]));
        report.value_b.push_back(std::max(g, vb.value[i]));
        report.gap.push_back(report.value_a.back() - report.value_b.back());
        lowest = std::min(lowest, report.gap.back());
        highest = std::max(highest, report.gap.back());
    }
    const bool a_ge = lowest >= -tol;
    const bool b_ge = highest <= tol;
    if (a_ge && b_ge) {
        report.verdict = Dominance::equal;
        report.max_violation = std::max(std::abs(lowest), std::abs(highest));
    } else if (a_ge) {
        report.verdict = Dominance::a_dominates;
        report.max_violation = std::max(0.0, -lowest);
    } else if (b_ge) {
        report.verdict = Dominance::b_dominates;
        report.max_violation = std::max(0.0, highest);
    } else {
        report.verdict = Dominance::incomparable;
    }
    return report;
}

}  // namespace equistop
