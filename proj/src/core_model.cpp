#include "equistop/core_model.hpp"

#include <algorithm>
#include <cmath>

namespace equistop {

using detail::require;

StateInterval::StateInterval(double lo, double hi) : lo_(lo), hi_(hi) {
    require(!std::isnan(lo) && !std::isnan(hi), "state interval endpoints must not be NaN");
    require(lo < hi, "state interval requires lo < hi");
}

bool StateInterval::bounded_below() const { return std::isfinite(lo_); }
bool StateInterval::bounded_above() const { return std::isfinite(hi_); }

std::string to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::gbm_vol_band: return "gbm-vol-band";
        case PriorKind::gbm_vol_and_rate_band: return "gbm-vol-and-rate-band";
        case PriorKind::gbm_vol_and_drift_band: return "gbm-vol-and-drift-band";
        case PriorKind::general_parametric: return "general-parametric";
    }
    return "unknown";
}

namespace {

void check_range(const ParamRange& r, const char* name, bool positive) {
    require(std::isfinite(r.low) && std::isfinite(r.high),
            std::string(name) + " band must be finite");
    require(r.low <= r.high, std::string(name) + " band requires low <= high");
    if (positive) require(r.low > 0.0, std::string(name) + " band must be positive");
}

}  // namespace

PriorFamily::PriorFamily(PriorKind kind, std::vector<ParamRange> box, CoefficientRule rule,
                         std::vector<int> counts)
    : kind_(kind), box_(std::move(box)), rule_(std::move(rule)), counts_(std::move(counts)) {
    require(!box_.empty(), "prior family needs at least one parameter");
    require(counts_.size() == box_.size(), "one sample count per parameter is required");
    for (int c : counts_) require(c >= 1, "parameter sample counts must be positive");
    require(static_cast<bool>(rule_), "prior family needs a coefficient rule");
}

PriorFamily PriorFamily::gbm_vol_band(double discount, ParamRange sigma, int samples) {
    require(discount > 0.0, "discount must be positive");
    check_range(sigma, "sigma", true);
    auto rule = [discount](std::span<const double> theta, double y) {
        return Coefficients{discount * y, theta[0] * y};
    };
    return {PriorKind::gbm_vol_band, {sigma}, rule, {samples}};
}

PriorFamily PriorFamily::gbm_vol_and_rate_band(ParamRange sigma, ParamRange rate, int samples) {
    check_range(sigma, "sigma", true);
    check_range(rate, "rate", true);
    auto rule = [](std::span<const double> theta, double y) {
        return Coefficients{theta[1] * y, theta[0] * y};
    };
    return {PriorKind::gbm_vol_and_rate_band, {sigma, rate}, rule, {samples, samples}};
}

PriorFamily PriorFamily::gbm_vol_and_drift_band(ParamRange sigma, ParamRange drift, int samples) {
    check_range(sigma, "sigma", true);
    check_range(drift, "drift", true);
    auto rule = [](std::span<const double> theta, double y) {
        return Coefficients{theta[1] * y, theta[0] * y};
    };
    return {PriorKind::gbm_vol_and_drift_band, {sigma, drift}, rule, {samples, samples}};
}

PriorFamily PriorFamily::general(std::vector<ParamRange> box, CoefficientRule rule,
                                 std::vector<int> samples_per_dim) {
    for (const auto& r : box) check_range(r, "parameter", false);
    return {PriorKind::general_parametric, std::move(box), std::move(rule),
            std::move(samples_per_dim)};
}

Coefficients PriorFamily::coefficients(std::span<const double> theta, double y) const {
    return rule_(theta, y);
}

double PriorFamily::discount(std::span<const double> theta, double base) const {
    return kind_ == PriorKind::gbm_vol_and_rate_band ? theta[1] : base;
}

std::vector<double> PriorFamily::axis(std::size_t dim) const {
    const ParamRange& r = box_.at(dim);
    const int n = counts_.at(dim);
    if (r.low == r.high || n == 1) return {r.low};
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = r.low + (r.high - r.low) * i / (n - 1);
    out.back() = r.high;
    return out;
}

std::vector<ParamPoint> PriorFamily::sample_grid() const {
    std::vector<ParamPoint> out{ParamPoint{}};
    for (std::size_t d = 0; d < dimension(); ++d) {
        std::vector<ParamPoint> next;
        for (const auto& prefix : out) {
            for (double v : axis(d)) {
                ParamPoint p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        }
        out = std::move(next);
    }
    return out;
}

PriorFamily PriorFamily::with_samples(int samples) const {
    PriorFamily copy = *this;
    std::fill(copy.counts_.begin(), copy.counts_.end(), samples);
    require(samples >= 1, "parameter sample counts must be positive");
    return copy;
}

Objective::Objective(double discount, double alpha, std::optional<double> strike,
                     PayoffRule payoff)
    : discount_(discount), alpha_(alpha), strike_(strike), payoff_(std::move(payoff)) {
    require(discount > 0.0, "discount must be positive");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
}

Objective Objective::put(double discount, double alpha, double strike) {
    require(strike > 0.0 && std::isfinite(strike), "strike must be positive");
    return {discount, alpha, strike, nullptr};
}

Objective Objective::general(double discount, double alpha, PayoffRule payoff) {
    require(static_cast<bool>(payoff), "payoff rule is required");
    return {discount, alpha, std::nullopt, std::move(payoff)};
}

double Objective::payoff(double y) const {
    if (strike_) return std::max(*strike_ - y, 0.0);
    return payoff_(y);
}

Objective Objective::with_alpha(double alpha) const {
    return {discount_, alpha, strike_, payoff_};
}

StateGrid::StateGrid(StateInterval interval, std::vector<double> points, double spacing)
    : interval_(interval), points_(std::move(points)), spacing_(spacing) {}

std::optional<std::size_t> StateGrid::floor_index(double x) const {
    if (x < points_.front()) return std::nullopt;
    auto it = std::upper_bound(points_.begin(), points_.end(), x);
    return static_cast<std::size_t>(it - points_.begin()) - 1;
}

GridPtr build_grid(const StateInterval& interval, int n_points,
                   std::optional<std::pair<double, double>> truncation) {
    require(n_points >= 3, "grid needs at least 3 points");
    double lo = 0.0;
    double hi = 0.0;
    double h = 0.0;
    if (truncation) {
        std::tie(lo, hi) = *truncation;
        require(std::isfinite(lo) && std::isfinite(hi), "truncation must be finite");
        require(lo < hi, "truncation requires lo < hi");
        require(interval.contains(lo) && interval.contains(hi),
                "truncation must lie strictly inside the state interval");
        h = (hi - lo) / (n_points - 1);
    } else {
        require(interval.bounded_below() && interval.bounded_above(),
                "an unbounded state interval needs a finite truncation");
        h = (interval.hi() - interval.lo()) / (n_points + 1);
        lo = interval.lo() + h;
        hi = interval.hi() - h;
    }
    std::vector<double> points(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) points[i] = lo + h * i;
    points.back() = hi;
    return std::shared_ptr<const StateGrid>(new StateGrid(interval, std::move(points), h));
}

GridPolicy::GridPolicy(GridPtr grid, std::vector<bool> mask)
    : grid_(std::move(grid)), mask_(std::move(mask)) {
    require(grid_ != nullptr, "policy needs a grid");
    require(mask_.size() == grid_->size(), "policy mask length must match the grid");
}

GridPolicy GridPolicy::empty(GridPtr grid) {
    const auto n = grid->size();
    return {std::move(grid), std::vector<bool>(n, false)};
}

GridPolicy GridPolicy::full(GridPtr grid) {
    const auto n = grid->size();
    return {std::move(grid), std::vector<bool>(n, true)};
}

GridPolicy GridPolicy::lower_set(GridPtr grid, double a) {
    std::vector<bool> mask(grid->size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (*grid)[i] <= a;
    return {std::move(grid), std::move(mask)};
}

GridPolicy GridPolicy::payoff_support(GridPtr grid, const Objective& objective) {
    std::vector<bool> mask(grid->size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = objective.payoff((*grid)[i]) > 0.0;
    return {std::move(grid), std::move(mask)};
}

std::size_t GridPolicy::count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

bool GridPolicy::contains_state(double x) const {
    const StateGrid& g = *grid_;
    if (!g.interval().contains(x)) return false;
    if (x <= g.front()) return mask_.front();
    if (x >= g.back()) return mask_.back();
    const std::size_t i = *g.floor_index(x);
    if (g[i] == x) return mask_[i];
    // Inside a cell: covered only when both ends belong to the same run.
    return mask_[i] && mask_[i + 1];
}

std::optional<double> GridPolicy::lower_threshold() const {
    if (!mask_.front()) return std::nullopt;
    std::size_t i = 0;
    while (i + 1 < mask_.size() && mask_[i + 1]) ++i;
    return (*grid_)[i];
}

bool GridPolicy::includes(const GridPolicy& other) const {
    require(other.size() == size(), "policies must share a grid");
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (other.mask_[i] && !mask_[i]) return false;
    return true;
}

ComponentDecomposition decompose_complement(const GridPolicy& policy) {
    ComponentDecomposition out;
    const auto& mask = policy.mask();
    out.grid_size = mask.size();
    std::size_t i = 0;
    while (i < mask.size()) {
        if (mask[i]) {
            ++i;
            continue;
        }
        Component c;
        c.first = i;
        c.left = i == 0 ? std::nullopt : std::optional<std::size_t>(i - 1);
        while (i < mask.size() && !mask[i]) ++i;
        c.last = i - 1;
        c.right = i == mask.size() ? std::nullopt : std::optional<std::size_t>(i);
        out.components.push_back(c);
    }
    return out;
}

std::vector<bool> reassemble(const ComponentDecomposition& decomposition) {
    std::vector<bool> mask(decomposition.grid_size, true);
    for (const auto& c : decomposition.components)
        for (std::size_t i = c.first; i <= c.last; ++i) mask[i] = false;
    return mask;
}

}  // namespace equistop
