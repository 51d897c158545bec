#pragma once

// Domain types shared by every engine: the state interval, prior families,
// the stopping objective, the uniform state grid and grid stopping policies.

#include "equistop/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace equistop {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Open state interval (lo, hi). `hi` may be +infinity, `lo` may be -infinity.
class StateInterval {
public:
    StateInterval(double lo, double hi);

    /// (0, +inf), the state space of a geometric Brownian motion.
    static StateInterval positive_half_line() { return {0.0, kInfinity}; }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool bounded_below() const;
    bool bounded_above() const;
    bool contains(double x) const { return x > lo_ && x < hi_; }

private:
    double lo_;
    double hi_;
};

enum class PriorKind {
    gbm_vol_band,
    gbm_vol_and_rate_band,
    gbm_vol_and_drift_band,
    general_parametric,
};

std::string to_string(PriorKind kind);

struct ParamRange {
    double low;
    double high;
};

/// Drift b(y) and volatility sigma(y) of one prior at state y.
struct Coefficients {
    double drift;
    double vol;
};

using CoefficientRule = std::function<Coefficients(std::span<const double> theta, double y)>;
using ParamPoint = std::vector<double>;

/// A finitely parameterized family theta -> (b_theta, sigma_theta) of diffusion
/// coefficients over a parameter box. Each prior is a fixed-coefficient law;
/// the family is searched on a uniform parameter grid.
///
/// In the rate-band family the discount rate is part of the parameter
/// (theta = (sigma, r)); use `discount()` to read the rate a prior implies.
class PriorFamily {
public:
    /// b(y) = r y, sigma(y) = theta y, theta in [sigma_low, sigma_high].
    static PriorFamily gbm_vol_band(double discount, ParamRange sigma, int samples = 17);
    /// theta = (sigma, rho): b(y) = rho y, sigma(y) = sigma y, discounting at rho.
    static PriorFamily gbm_vol_and_rate_band(ParamRange sigma, ParamRange rate, int samples = 17);
    /// theta = (sigma, b): b(y) = b y, sigma(y) = sigma y.
    static PriorFamily gbm_vol_and_drift_band(ParamRange sigma, ParamRange drift, int samples = 17);
    /// Arbitrary coefficient rule over a parameter box.
    static PriorFamily general(std::vector<ParamRange> box, CoefficientRule rule,
                               std::vector<int> samples_per_dim);

    PriorKind kind() const { return kind_; }
    bool is_gbm() const { return kind_ != PriorKind::general_parametric; }
    std::size_t dimension() const { return box_.size(); }
    std::span<const ParamRange> box() const { return box_; }
    std::span<const int> grid_counts() const { return counts_; }

    Coefficients coefficients(std::span<const double> theta, double y) const;
    /// Discount rate of the prior `theta`; `base` unless the family carries the rate.
    double discount(std::span<const double> theta, double base) const;

    /// Uniform samples along one parameter dimension (endpoints included).
    std::vector<double> axis(std::size_t dim) const;
    /// Cartesian product of all axes, first dimension varying slowest.
    std::vector<ParamPoint> sample_grid() const;

    /// Copy of this family with a different number of samples on every axis.
    PriorFamily with_samples(int samples) const;

private:
    PriorFamily(PriorKind kind, std::vector<ParamRange> box, CoefficientRule rule,
                std::vector<int> counts);

    PriorKind kind_;
    std::vector<ParamRange> box_;
    CoefficientRule rule_;
    std::vector<int> counts_;
};

using PayoffRule = std::function<double(double)>;

/// Discount rate, ambiguity weight alpha and payoff g.
class Objective {
public:
    /// g(y) = (K - y)^+.
    static Objective put(double discount, double alpha, double strike);
    static Objective general(double discount, double alpha, PayoffRule payoff);

    double discount() const { return discount_; }
    double alpha() const { return alpha_; }
    std::optional<double> strike() const { return strike_; }
    bool is_put() const { return strike_.has_value(); }
    double payoff(double y) const;

    /// Same objective with a different alpha.
    Objective with_alpha(double alpha) const;

private:
    Objective(double discount, double alpha, std::optional<double> strike, PayoffRule payoff);

    double discount_;
    double alpha_;
    std::optional<double> strike_;
    PayoffRule payoff_;
};

/// Uniform grid of states strictly inside the interval.
class StateGrid {
public:
    const StateInterval& interval() const { return interval_; }
    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double spacing() const { return spacing_; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

    /// Index of the largest grid point <= x, or nullopt when x < front().
    std::optional<std::size_t> floor_index(double x) const;

private:
    friend std::shared_ptr<const StateGrid> build_grid(const StateInterval&, int,
                                                       std::optional<std::pair<double, double>>);
    StateGrid(StateInterval interval, std::vector<double> points, double spacing);

    StateInterval interval_;
    std::vector<double> points_;
    double spacing_;
};

using GridPtr = std::shared_ptr<const StateGrid>;

/// Uniform grid of `n_points` states. With a truncation pair the grid covers
/// the closed truncation interval, which must sit strictly inside `interval`;
/// without one the interval must be bounded and the grid is placed strictly
/// inside it.
GridPtr build_grid(const StateInterval& interval, int n_points,
                   std::optional<std::pair<double, double>> truncation = std::nullopt);

/// A stopping region on a grid. A true entry means the closed stopping set
/// contains that state. A run of true entries i..j stands for the closed
/// interval [x_i, x_j]; a true first (last) entry also covers everything
/// between the lower (upper) end of the interval and the grid.
class GridPolicy {
public:
    GridPolicy(GridPtr grid, std::vector<bool> mask);

    static GridPolicy empty(GridPtr grid);
    static GridPolicy full(GridPtr grid);
    /// Points with x <= a, i.e. the policy (lo, a].
    static GridPolicy lower_set(GridPtr grid, double a);
    /// Points where the payoff is strictly positive.
    static GridPolicy payoff_support(GridPtr grid, const Objective& objective);

    const StateGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<bool>& mask() const { return mask_; }
    std::size_t size() const { return mask_.size(); }
    bool operator[](std::size_t i) const { return mask_[i]; }
    std::size_t count() const;

    /// Membership of an arbitrary state in the closed stopping set.
    bool contains_state(double x) const;
    /// Largest state of the leading run of true entries, i.e. the `a` of a
    /// policy shaped like (lo, a]. Nullopt when the first entry is false.
    std::optional<double> lower_threshold() const;
    /// True when every entry of `other` is also set here.
    bool includes(const GridPolicy& other) const;

    friend bool operator==(const GridPolicy& a, const GridPolicy& b) {
        return a.grid_ == b.grid_ && a.mask_ == b.mask_;
    }

private:
    GridPtr grid_;
    std::vector<bool> mask_;
};

/// One maximal run of false entries first..last. `left`/`right` index the
/// bracketing true entries; nullopt means the run reaches the domain boundary.
struct Component {
    std::optional<std::size_t> left;
    std::optional<std::size_t> right;
    std::size_t first;
    std::size_t last;

    friend bool operator==(const Component&, const Component&) = default;
};

struct ComponentDecomposition {
    std::size_t grid_size = 0;
    std::vector<Component> components;
};

ComponentDecomposition decompose_complement(const GridPolicy& policy);

/// Inverse of decompose_complement.
std::vector<bool> reassemble(const ComponentDecomposition& decomposition);

}  // namespace equistop
