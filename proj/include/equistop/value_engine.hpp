#pragma once

// Numerical evaluation of the alpha-maxmin objective
//   J(x, R) = alpha inf_theta E_theta[e^{-r rho_R} g(X_rho_R)]
//           + (1 - alpha) sup_theta E_theta[e^{-r rho_R} g(X_rho_R)]
// for a grid policy R. Each expectation is the solution of the exit-value
// boundary problem b u' + sigma^2 u'' / 2 - r u = 0 on a complement
// component (p, q) with u(p), u(q) given.

#include "equistop/core_model.hpp"

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace equistop {

/// Coordinate in which the finite-difference mesh is uniform.
enum class MeshKind { uniform, logarithmic };

struct ExitValueProblem {
    double p;
    double q;
    double value_p;
    double value_q;
    std::function<Coefficients(double)> coefficients;
    double discount;
    MeshKind mesh = MeshKind::uniform;
};

class ExitValueSolution {
public:
    ExitValueSolution(MeshKind mesh, std::vector<double> nodes, std::vector<double> values);

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> values() const { return values_; }
    /// Cubic Lagrange interpolation in the mesh coordinate; x is clamped to [p, q].
    double at(double x) const;

private:
    MeshKind mesh_;
    std::vector<double> nodes_;
    std::vector<double> values_;
    double z0_;
    double dz_;
};

/// Second-order central differences on `n_nodes` mesh nodes, solved by
/// tridiagonal elimination. Throws NumericalFailure on a singular system.
ExitValueSolution solve_exit_value(const ExitValueProblem& problem, int n_nodes);

/// In-place Thomas algorithm; `rhs` receives the solution.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs);

struct ValueEngineConfig {
    /// Node count for components that reach a far field, and the cap for all others.
    int n_nodes = 4000;
    /// Nodes per grid cell for interior components.
    int nodes_per_cell = 16;
    int min_nodes = 17;
    /// Golden-section refinement of the prior optimum around the sampled incumbent.
    bool refine = true;
    double refine_rel_tol = 1e-6;
    /// Far-field distance (as a ratio to the grid end) on logarithmic meshes.
    double far_field_factor = 1e4;
    int threads = 0;
};

/// Per-grid-point values of one policy. For x in R every entry equals g(x)
/// and the argmin/argmax points are empty.
struct ValueProfile {
    std::vector<double> inf_value;
    std::vector<double> sup_value;
    std::vector<double> value;
    std::vector<ParamPoint> argmin;
    std::vector<ParamPoint> argmax;
};

/// Extremal values over the prior family on one complement component.
struct ComponentValues {
    std::vector<double> inf_value;
    std::vector<double> sup_value;
    std::vector<ParamPoint> argmin;
    std::vector<ParamPoint> argmax;
};

/// Memo of component results keyed by the component's bracketing indices.
/// Valid for a single (grid, objective, priors, config) combination; only the
/// grid identity is checked.
class ComponentCache {
public:
    std::size_t size() const;
    std::size_t hits() const { return hits_; }

private:
    friend ValueProfile alpha_maxmin_value(const GridPolicy&, const Objective&, const PriorFamily&,
                                           const ValueEngineConfig&, ComponentCache*);
    using Key = std::pair<long, long>;
    const StateGrid* grid_ = nullptr;
    std::map<Key, std::shared_ptr<const ComponentValues>> entries_;
    std::size_t hits_ = 0;
};

MeshKind mesh_for(const PriorFamily& priors);

ValueProfile alpha_maxmin_value(const GridPolicy& policy, const Objective& objective,
                                const PriorFamily& priors, const ValueEngineConfig& config = {},
                                ComponentCache* cache = nullptr);

struct RegionMasks {
    std::vector<bool> stop;         // g - J > tie_tol
    std::vector<bool> indifferent;  // |g - J| <= tie_tol
    std::vector<bool> cont;         // J - g > tie_tol
};

/// 1e-7 max(1, K) in put mode, 1e-7 otherwise.
double default_tie_tol(const Objective& objective);

RegionMasks split_regions(const ValueProfile& profile, const GridPolicy& policy,
                          const Objective& objective, double tie_tol);

/// Sink for engine warnings; defaults to std::clog. Pass nullptr to restore.
void set_warning_sink(std::function<void(const std::string&)> sink);

}  // namespace equistop
