#pragma once

// The stopping-region operator Theta(R) = S_R u (I_R n R), its monotone
// iteration towards an equilibrium, and comparison of equilibria.

#include "equistop/core_model.hpp"
#include "equistop/value_engine.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace equistop {

struct FixedPointConfig {
    ValueEngineConfig engine;
    /// Negative selects default_tie_tol(objective).
    double tie_tol = -1.0;
};

double resolve_tie_tol(const FixedPointConfig& config, const Objective& objective);

/// Snapshots R_0 = seed, R_1 = Theta(R_0), ... of one iteration.
struct IterationTrace {
    std::vector<GridPolicy> policies;
    /// added[k] = |R_k \ R_{k-1}|, with added[0] = 0 for the seed.
    std::vector<std::size_t> added;
    /// Index k of the first policy with Theta(R_k) = R_k; nullopt when unfinished.
    std::optional<std::size_t> converged_step;

    const GridPolicy& final_policy() const { return policies.back(); }
};

/// Thrown when the iteration exhausts its step budget; carries the partial trace.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, IterationTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const IterationTrace& trace() const { return trace_; }

private:
    IterationTrace trace_;
};

/// Theta applied to `policy`. The result always contains the input.
GridPolicy theta(const GridPolicy& policy, const Objective& objective, const PriorFamily& priors,
                 const FixedPointConfig& config = {}, ComponentCache* cache = nullptr);

IterationTrace iterate_to_equilibrium(const GridPolicy& seed, const Objective& objective,
                                      const PriorFamily& priors, int max_iter,
                                      const FixedPointConfig& config = {});

enum class ViolationKind {
    stop_outside_policy,     // x in S_R \ R
    continue_inside_policy,  // x in R \ (S_R u I_R)
};

const char* to_string(ViolationKind kind);

struct Violation {
    std::size_t index;
    double x;
    ViolationKind kind;
};

struct EquilibriumCheck {
    bool equilibrium;
    std::vector<Violation> violations;
};

EquilibriumCheck is_equilibrium(const GridPolicy& policy, const Objective& objective,
                                const PriorFamily& priors, const FixedPointConfig& config = {});

enum class Dominance { a_dominates, b_dominates, equal, incomparable };

const char* to_string(Dominance d);

struct DominanceReport {
    Dominance verdict;
    std::vector<double> value_a;  // V(x, R_a) = max(g, J)
    std::vector<double> value_b;
    std::vector<double> gap;      // value_a - value_b
    double max_violation;         // largest gap against the verdict; 0 when incomparable
};

/// Pointwise comparison of V(., R_a) and V(., R_b); throws InvalidInput
/// unless both policies are equilibria.
DominanceReport compare_equilibria(const GridPolicy& policy_a, const GridPolicy& policy_b,
                                   const Objective& objective, const PriorFamily& priors,
                                   const FixedPointConfig& config = {});

}  // namespace equistop
