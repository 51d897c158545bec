#include "equistop/value_engine.hpp"

#include "equistop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace equistop {

using detail::require;

namespace {

std::function<void(const std::string&)>& warning_sink() {
    static std::function<void(const std::string&)> sink;
    return sink;
}

void warn(const std::string& message) {
    if (auto& sink = warning_sink()) {
        sink(message);
    } else {
        std::clog << "[equistop] warning: " << message << '\n';
    }
}

double to_mesh(MeshKind mesh, double x) { return mesh == MeshKind::logarithmic ? std::log(x) : x; }
double from_mesh(MeshKind mesh, double z) { return mesh == MeshKind::logarithmic ? std::exp(z) : z; }

constexpr double kGoldenRatio = 0.6180339887498949;

}  // namespace

void set_warning_sink(std::function<void(const std::string&)> sink) {
    warning_sink() = std::move(sink);
}

ExitValueSolution::ExitValueSolution(MeshKind mesh, std::vector<double> nodes,
                                     std::vector<double> values)
    : mesh_(mesh), nodes_(std::move(nodes)), values_(std::move(values)) {
    z0_ = to_mesh(mesh_, nodes_.front());
    dz_ = (to_mesh(mesh_, nodes_.back()) - z0_) / static_cast<double>(nodes_.size() - 1);
}

double ExitValueSolution::at(double x) const {
    const std::size_t n = nodes_.size();
    if (x <= nodes_.front()) return values_.front();
    if (x >= nodes_.back()) return values_.back();
    const double s = (to_mesh(mesh_, x) - z0_) / dz_;
    auto i = static_cast<std::size_t>(std::floor(s));
    i = std::min(i, n - 2);
    const double t = s - static_cast<double>(i);
    if (t == 0.0) return values_[i];
    if (n < 4) return values_[i] + t * (values_[i + 1] - values_[i]);
    // Four-point stencil k..k+3 containing the cell [i, i+1].
    const std::size_t k = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, n - 4);
    const double u = s - static_cast<double>(k);
    const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    return l0 * values_[k] + l1 * values_[k + 1] + l2 * values_[k + 2] + l3 * values_[k + 3];
}

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs) {
    const std::size_t n = diag.size();
    require(sub.size() == n && super.size() == n && rhs.size() == n,
            "tridiagonal bands must have equal length");
    std::vector<double> c(n);
    double pivot = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) pivot = diag[i] - sub[i] * c[i - 1];
        const double scale = std::abs(diag[i]) + std::abs(sub[i]) + std::abs(super[i]);
        if (!(std::abs(pivot) > 1e-300 + 1e-14 * scale)) {
            std::ostringstream os;
            os << "singular tridiagonal system at row " << i << " of " << n << " (pivot " << pivot
               << ", diag " << diag[i] << ", sub " << sub[i] << ", super " << super[i] << ")";
            throw NumericalFailure(os.str());
        }
        c[i] = super[i] / pivot;
        rhs[i] = (rhs[i] - (i > 0 ? sub[i] * rhs[i - 1] : 0.0)) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

ExitValueSolution solve_exit_value(const ExitValueProblem& problem, int n_nodes) {
    require(n_nodes >= 3, "exit-value solve needs at least 3 nodes");
    require(problem.p < problem.q, "exit-value component needs p < q");
    require(std::isfinite(problem.value_p) && std::isfinite(problem.value_q),
            "exit-value boundary values must be finite");
    require(problem.discount > 0.0, "exit-value discount must be positive");
    if (problem.mesh == MeshKind::logarithmic)
        require(problem.p > 0.0, "logarithmic mesh needs a positive component");

    const auto n = static_cast<std::size_t>(n_nodes);
    const MeshKind mesh = problem.mesh;
    const double z0 = to_mesh(mesh, problem.p);
    const double dz = (to_mesh(mesh, problem.q) - z0) / static_cast<double>(n - 1);

    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = from_mesh(mesh, z0 + dz * static_cast<double>(i));
    nodes.front() = problem.p;
    nodes.back() = problem.q;

    // Unknowns are the interior nodes 1..n-2.
    const std::size_t m = n - 2;
    std::vector<double> sub(m), diag(m), super(m), rhs(m, 0.0);
    const double inv_dz2 = 1.0 / (dz * dz);
    const double inv_2dz = 0.5 / dz;
    for (std::size_t j = 0; j < m; ++j) {
        const double x = nodes[j + 1];
        const Coefficients c = problem.coefficients(x);
        if (!(c.vol > 0.0)) {
            std::ostringstream os;
            os << "volatility must be positive on the component, got " << c.vol << " at " << x;
            throw InvalidInput(os.str());
        }
        double a = 0.5 * c.vol * c.vol;
        double b = c.drift;
        if (mesh == MeshKind::logarithmic) {
            a /= x * x;
            b = b / x - a;
        }
        sub[j] = a * inv_dz2 - b * inv_2dz;
        diag[j] = -2.0 * a * inv_dz2 - problem.discount;
        super[j] = a * inv_dz2 + b * inv_2dz;
    }
    rhs.front() -= sub.front() * problem.value_p;
    rhs.back() -= super.back() * problem.value_q;
    sub.front() = 0.0;
    super.back() = 0.0;
    solve_tridiagonal(sub, diag, super, rhs);

    std::vector<double> values(n);
    values.front() = problem.value_p;
    values.back() = problem.value_q;
    std::copy(rhs.begin(), rhs.end(), values.begin() + 1);
    return {mesh, std::move(nodes), std::move(values)};
}

std::size_t ComponentCache::size() const { return entries_.size(); }

MeshKind mesh_for(const PriorFamily& priors) {
    return priors.is_gbm() ? MeshKind::logarithmic : MeshKind::uniform;
}

double default_tie_tol(const Objective& objective) {
    return 1e-7 * std::max(1.0, objective.strike().value_or(1.0));
}

namespace {

struct Endpoint {
    double x;
    double value;
    bool far_field;
};

// Solves one component for every prior it is asked about, memoizing by theta.
class ComponentSolver {
public:
    ComponentSolver(const GridPolicy& policy, const Component& component,
                    const Objective& objective, const PriorFamily& priors,
                    const ValueEngineConfig& config)
        : grid_(policy.grid()),
          component_(component),
          objective_(objective),
          priors_(priors),
          config_(config),
          mesh_(mesh_for(priors)) {
        left_ = endpoint(component.left, true);
        right_ = endpoint(component.right, false);
        if (left_.far_field || right_.far_field) {
            nodes_ = config.n_nodes;
        } else {
            const auto cells = static_cast<long>(component.last - component.first + 2);
            nodes_ = static_cast<int>(std::clamp<long>(cells * config.nodes_per_cell + 1,
                                                       config.min_nodes, config.n_nodes));
        }
        nodes_ = std::max(nodes_, 3);
    }

    bool uses_general_far_field() const {
        return !objective_.is_put() && (left_.far_field || right_.far_field);
    }

    // Values at the component's grid points under prior theta.
    const std::vector<double>& values(const ParamPoint& theta) {
        auto it = memo_.find(theta);
        if (it != memo_.end()) return it->second;
        std::vector<double> out(component_.last - component_.first + 1);
        const bool trivial = left_.value == 0.0 && right_.value == 0.0;
        if (!trivial) {
            ExitValueProblem problem{
                left_.x,
                right_.x,
                left_.value,
                right_.value,
                [this, &theta](double y) { return priors_.coefficients(theta, y); },
                priors_.discount(theta, objective_.discount()),
                mesh_,
            };
            const ExitValueSolution sol = solve_exit_value(problem, nodes_);
            for (std::size_t i = component_.first; i <= component_.last; ++i)
                out[i - component_.first] = sol.at(grid_[i]);
        }
        return memo_.emplace(theta, std::move(out)).first->second;
    }

    ComponentValues optimize(const std::vector<ParamPoint>& samples) {
        const std::size_t width = component_.last - component_.first + 1;
        ComponentValues out;
        out.inf_value.assign(width, kInfinity);
        out.sup_value.assign(width, -kInfinity);
        out.argmin.resize(width);
        out.argmax.resize(width);
        std::vector<std::size_t> lo_idx(width, 0), hi_idx(width, 0);
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const auto& v = values(samples[s]);
            for (std::size_t j = 0; j < width; ++j) {
                if (v[j] < out.inf_value[j]) {
                    out.inf_value[j] = v[j];
                    lo_idx[j] = s;
                }
                if (v[j] > out.sup_value[j]) {
                    out.sup_value[j] = v[j];
                    hi_idx[j] = s;
                }
            }
        }
        for (std::size_t j = 0; j < width; ++j) {
            out.argmin[j] = samples[lo_idx[j]];
            out.argmax[j] = samples[hi_idx[j]];
            if (config_.refine) {
                refine(j, +1.0, out.argmin[j], out.inf_value[j]);
                refine(j, -1.0, out.argmax[j], out.sup_value[j]);
            }
        }
        return out;
    }

private:
    Endpoint endpoint(std::optional<std::size_t> index, bool lower) const {
        if (index) return {grid_[*index], objective_.payoff(grid_[*index]), false};
        const StateInterval& iv = grid_.interval();
        double x = 0.0;
        if (mesh_ == MeshKind::logarithmic) {
            x = lower ? std::max(iv.lo(), grid_.front() / config_.far_field_factor)
                      : std::min(iv.hi(), grid_.back() * config_.far_field_factor);
        } else if (lower) {
            x = iv.bounded_below() ? iv.lo() : grid_.front();
        } else {
            x = iv.bounded_above() ? iv.hi() : grid_.back();
        }
        // Put payoffs vanish under discounting at the far field; other payoffs
        // fall back to g at the truncation point.
        return {x, objective_.is_put() ? 0.0 : objective_.payoff(x), true};
    }

    // Coordinate-wise golden-section search (sign +1: minimize, -1: maximize)
    // on the bracket spanned by the incumbent's neighbouring samples.
    void refine(std::size_t j, double sign, ParamPoint& best, double& best_value) {
        for (std::size_t d = 0; d < priors_.dimension(); ++d) {
            const std::vector<double> axis = priors_.axis(d);
            if (axis.size() < 2) continue;
            const auto pos = std::lower_bound(axis.begin(), axis.end(), best[d]) - axis.begin();
            const auto k = static_cast<std::size_t>(std::clamp<long>(pos, 0, static_cast<long>(axis.size()) - 1));
            double a = axis[k == 0 ? 0 : k - 1];
            double b = axis[std::min(k + 1, axis.size() - 1)];
            ParamPoint probe = best;
            auto f = [&](double t) {
                probe[d] = t;
                return sign * values(probe)[j];
            };
            const double tol = config_.refine_rel_tol * std::max({std::abs(a), std::abs(b), 1e-12});
            double c = b - kGoldenRatio * (b - a);
            double e = a + kGoldenRatio * (b - a);
            double fc = f(c);
            double fe = f(e);
            while (b - a > tol) {
                if (fc < fe) {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - kGoldenRatio * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + kGoldenRatio * (b - a);
                    fe = f(e);
                }
            }
            const double t = fc < fe ? c : e;
            const double ft = std::min(fc, fe);
            if (ft < sign * best_value) {
                best[d] = t;
                best_value = sign * ft;
            }
        }
    }

    const StateGrid& grid_;
    Component component_;
    const Objective& objective_;
    const PriorFamily& priors_;
    const ValueEngineConfig& config_;
    MeshKind mesh_;
    Endpoint left_{};
    Endpoint right_{};
    int nodes_ = 3;
    std::map<ParamPoint, std::vector<double>> memo_;
};

long key_index(std::optional<std::size_t> i) { return i ? static_cast<long>(*i) : -1L; }

}  // namespace

ValueProfile alpha_maxmin_value(const GridPolicy& policy, const Objective& objective,
                                const PriorFamily& priors, const ValueEngineConfig& config,
                                ComponentCache* cache) {
    const StateGrid& grid = policy.grid();
    const std::vector<ParamPoint> samples = priors.sample_grid();
    require(!samples.empty(), "prior grid is empty");
    if (priors.is_gbm())
        require(grid.interval().lo() >= 0.0 && grid.front() > 0.0,
                "GBM priors need a positive state grid");
    if (cache) {
        if (cache->grid_ == nullptr) cache->grid_ = &grid;
        require(cache->grid_ == &grid, "component cache belongs to a different grid");
    }

    const ComponentDecomposition decomposition = decompose_complement(policy);
    const auto& components = decomposition.components;
    std::vector<std::shared_ptr<const ComponentValues>> results(components.size());
    std::vector<std::size_t> pending;
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (cache) {
            auto it = cache->entries_.find({key_index(components[c].left),
                                            key_index(components[c].right)});
            if (it != cache->entries_.end()) {
                results[c] = it->second;
                ++cache->hits_;
                continue;
            }
        }
        pending.push_back(c);
    }

    std::vector<char> general_far_field(pending.size(), 0);
    parallel_for(pending.size(), config.threads, [&](std::size_t t) {
        const std::size_t c = pending[t];
        ComponentSolver solver(policy, components[c], objective, priors, config);
        general_far_field[t] = solver.uses_general_far_field();
        results[c] = std::make_shared<const ComponentValues>(solver.optimize(samples));
    });
    if (std::find(general_far_field.begin(), general_far_field.end(), 1) != general_far_field.end())
        warn("component reaches a truncation boundary; using g at the truncation point as the "
             "boundary value");
    if (cache) {
        for (std::size_t c : pending)
            cache->entries_.emplace(ComponentCache::Key{key_index(components[c].left),
                                                        key_index(components[c].right)},
                                    results[c]);
    }

    const std::size_t n = grid.size();
    ValueProfile profile;
    profile.inf_value.resize(n);
    profile.sup_value.resize(n);
    profile.value.resize(n);
    profile.argmin.resize(n);
    profile.argmax.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (policy[i]) {
            const double g = objective.payoff(grid[i]);
            profile.inf_value[i] = profile.sup_value[i] = profile.value[i] = g;
        }
    }
    const double alpha = objective.alpha();
    for (std::size_t c = 0; c < components.size(); ++c) {
        const ComponentValues& r = *results[c];
        for (std::size_t i = components[c].first; i <= components[c].last; ++i) {
            const std::size_t j = i - components[c].first;
            profile.inf_value[i] = r.inf_value[j];
            profile.sup_value[i] = r.sup_value[j];
            profile.value[i] = alpha * r.inf_value[j] + (1.0 - alpha) * r.sup_value[j];
            profile.argmin[i] = r.argmin[j];
            profile.argmax[i] = r.argmax[j];
        }
    }
    return profile;
}

RegionMasks split_regions(const ValueProfile& profile, const GridPolicy& policy,
                          const Objective& objective, double tie_tol) {
    const std::size_t n = policy.size();
    require(profile.value.size() == n, "profile does not match the policy grid");
    require(tie_tol >= 0.0, "tie tolerance must be nonnegative");
    RegionMasks out{std::vector<bool>(n), std::vector<bool>(n), std::vector<bool>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = objective.payoff(policy.grid()[i]) - profile.value[i];
        if (diff > tie_tol) {
            out.stop[i] = true;
        } else if (diff < -tie_tol) {
            out.cont[i] = true;
        } else {
            out.indifferent[i] = true;
        }
    }
    return out;
}

}  // namespace equistop
