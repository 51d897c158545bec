#include "equistop/mc_oracle.hpp"

#include "equistop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

namespace equistop {

using detail::require;

namespace {

constexpr std::int64_t kShardSize = 1024;
// Steps longer than dt keep |drift| dt + kSafety sigma sqrt(dt) below the
// distance to the nearest boundary.
constexpr double kSafety = 7.0;
constexpr double kMonitoringShift = 0.5826;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Open complement component (lo, hi) containing the start; infinite ends are
// never hit.
struct Target {
    double lo;
    double hi;
};

struct Hit {
    double time;
    double state;
    bool hit;
};

Target component_of(double x, const GridPolicy& policy) {
    require(!policy.contains_state(x), "start state lies in the stopping policy");
    const StateGrid& grid = policy.grid();
    Target t{-kInfinity, kInfinity};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!policy[i]) continue;
        if (grid[i] < x) t.lo = grid[i];
        if (grid[i] > x) {
            t.hi = grid[i];
            break;
        }
    }
    return t;
}

struct Dynamics {
    Scheme scheme;
    double mu = 0.0;     // exact GBM: dX = mu X dt + s X dW
    double s = 0.0;
    const PriorFamily* priors = nullptr;
    ParamPoint theta;
};

Dynamics make_dynamics(const PriorFamily& priors, const ParamPoint& theta, const SimConfig& cfg) {
    require(theta.size() == priors.dimension(), "prior parameter has the wrong dimension");
    Dynamics d;
    d.scheme = cfg.scheme;
    d.priors = &priors;
    d.theta = theta;
    if (cfg.scheme == Scheme::exact_gbm) {
        require(priors.is_gbm(), "the exact-gbm scheme needs a GBM prior family");
        const Coefficients c = priors.coefficients(theta, 1.0);
        d.mu = c.drift;
        d.s = c.vol;
        require(d.s > 0.0, "volatility must be positive");
    }
    return d;
}

// Simulates one path from x0 and records the first exit of every target.
// Targets must be nested (each contains the next) for the step-size logic
// and bridge draws to stay coupled across targets.
void simulate_path(double x0, std::span<const Target> targets, const Dynamics& dyn,
                   const SimConfig& cfg, std::uint64_t path_index, std::span<Hit> hits) {
    std::mt19937_64 gen(splitmix64(cfg.rng_seed ^ splitmix64(path_index)));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const auto total_steps = static_cast<std::int64_t>(std::llround(cfg.horizon / cfg.dt));

    std::fill(hits.begin(), hits.end(), Hit{cfg.horizon, 0.0, false});
    // Nested targets exit innermost (last) first; targets[0..remaining) are live.
    std::size_t remaining = targets.size();

    const bool gbm = dyn.scheme == Scheme::exact_gbm;
    const double nu = dyn.mu - 0.5 * dyn.s * dyn.s;
    double x = x0;
    double y = gbm ? std::log(x0) : x0;
    std::int64_t step = 0;

    auto log_or_id = [gbm](double v) {
        if (!gbm) return v;
        if (v <= 0.0) return -kInfinity;
        return std::log(v);
    };

    while (remaining > 0 && step < total_steps) {
        // Innermost live target is targets[remaining - 1].
        const Target& inner = targets[remaining - 1];
        std::int64_t k = 1;
        if (gbm && cfg.adaptive_steps) {
            const double d = std::min(y - log_or_id(inner.lo), log_or_id(inner.hi) - y);
            double root = 0.0;
            if (std::isinf(d)) {
                root = kInfinity;
            } else if (std::abs(nu) > 0.0) {
                root = (-kSafety * dyn.s +
                        std::sqrt(kSafety * kSafety * dyn.s * dyn.s + 4.0 * std::abs(nu) * d)) /
                       (2.0 * std::abs(nu));
            } else {
                root = d / (kSafety * dyn.s);
            }
            const double max_dt = root * root;
            if (max_dt > 2.0 * cfg.dt) {
                const double steps = std::floor(max_dt / cfg.dt);
                k = steps >= static_cast<double>(total_steps) ? total_steps
                                                              : static_cast<std::int64_t>(steps);
            }
        }
        k = std::min(k, total_steps - step);
        const double h = cfg.dt * static_cast<double>(k);
        const double z = normal(gen);
        const double y_prev = y;
        if (gbm) {
            y += nu * h + dyn.s * std::sqrt(h) * z;
            x = std::exp(y);
        } else {
            const Coefficients c = dyn.priors->coefficients(dyn.theta, x);
            x += c.drift * h + c.vol * std::sqrt(h) * z;
            y = x;
        }
        step += k;
        const double t = cfg.dt * static_cast<double>(step);

        double u = 2.0;
        if (cfg.bridge_correction) u = uniform(gen);
        while (remaining > 0) {
            const Target& tg = targets[remaining - 1];
            bool exited = false;
            double state = x;
            if (x <= tg.lo || x >= tg.hi) {
                exited = true;
                // Bridge-corrected runs model continuous monitoring, where the
                // path leaves exactly through the boundary.
                if (cfg.bridge_correction) state = x <= tg.lo ? tg.lo : tg.hi;
            } else if (cfg.bridge_correction) {
                const double vol = gbm ? dyn.s : dyn.priors->coefficients(dyn.theta, x).vol;
                const double var = vol * vol * h;
                const double dl = log_or_id(tg.lo);
                const double dh = log_or_id(tg.hi);
                const double p_lo = std::isinf(dl) ? 0.0 : std::exp(-2.0 * (y_prev - dl) * (y - dl) / var);
                const double p_hi = std::isinf(dh) ? 0.0 : std::exp(-2.0 * (dh - y_prev) * (dh - y) / var);
                const double p = 1.0 - (1.0 - p_lo) * (1.0 - p_hi);
                if (u < p) {
                    exited = true;
                    state = p_lo >= p_hi ? tg.lo : tg.hi;
                }
            }
            if (!exited) break;
            hits[remaining - 1] = {t, state, true};
            --remaining;
        }
    }
}

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t absorbed = 0;
    std::int64_t count = 0;
};

}  // namespace

const char* to_string(Scheme scheme) {
    return scheme == Scheme::exact_gbm ? "exact-gbm" : "euler";
}

SimConfig SimConfig::for_objective(const Objective& objective) {
    SimConfig cfg;
    cfg.horizon = 20.0 / objective.discount();
    return cfg;
}

void SimConfig::validate() const {
    require(n_paths >= 100, "simulation needs at least 100 paths");
    require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
    require(dt <= horizon, "dt must not exceed the horizon");
}

HittingEstimate estimate_hitting_value(double x, const GridPolicy& policy,
                                       const PriorFamily& priors, const ParamPoint& theta,
                                       const Objective& objective, const SimConfig& config) {
    config.validate();
    const Target target = component_of(x, policy);
    const Dynamics dyn = make_dynamics(priors, theta, config);
    const double r = priors.discount(theta, objective.discount());

    const std::int64_t shards = (config.n_paths + kShardSize - 1) / kShardSize;
    std::vector<Accumulator> acc(static_cast<std::size_t>(shards));
    parallel_for(acc.size(), config.threads, [&](std::size_t s) {
        const std::int64_t begin = static_cast<std::int64_t>(s) * kShardSize;
        const std::int64_t end = std::min(begin + kShardSize, config.n_paths);
        Accumulator a;
        Hit hit{};
        for (std::int64_t i = begin; i < end; ++i) {
            simulate_path(x, std::span(&target, 1), dyn, config, static_cast<std::uint64_t>(i),
                          std::span(&hit, 1));
            double v = 0.0;
            if (hit.hit) {
                v = std::exp(-r * hit.time) * objective.payoff(hit.state);
                ++a.absorbed;
            }
            a.sum += v;
            a.sum_sq += v * v;
            ++a.count;
        }
        acc[s] = a;
    });

    Accumulator total;
    for (const auto& a : acc) {
        total.sum += a.sum;
        total.sum_sq += a.sum_sq;
        total.absorbed += a.absorbed;
        total.count += a.count;
    }
    const auto n = static_cast<double>(total.count);
    const double mean = total.sum / n;
    const double var = std::max(0.0, (total.sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n), total.absorbed, total.count - total.absorbed};
}

MaxminEstimate empirical_maxmin(double x, const GridPolicy& policy, const PriorFamily& priors,
                                const Objective& objective, const SimConfig& config) {
    MaxminEstimate out{};
    out.priors = priors.sample_grid();
    require(!out.priors.empty(), "prior grid is empty");
    for (const auto& theta : out.priors)
        out.per_prior.push_back(estimate_hitting_value(x, policy, priors, theta, objective, config));
    for (std::size_t i = 1; i < out.per_prior.size(); ++i) {
        if (out.per_prior[i].mean < out.per_prior[out.argmin].mean) out.argmin = i;
        if (out.per_prior[i].mean > out.per_prior[out.argmax].mean) out.argmax = i;
    }
    const double alpha = objective.alpha();
    out.inf_value = out.per_prior[out.argmin].mean;
    out.sup_value = out.per_prior[out.argmax].mean;
    out.value = alpha * out.inf_value + (1.0 - alpha) * out.sup_value;
    out.std_error = alpha * out.per_prior[out.argmin].std_error +
                    (1.0 - alpha) * out.per_prior[out.argmax].std_error;
    return out;
}

CapacityReport capacity_diagnostic(double x, const std::vector<GridPolicy>& policies,
                                   const PriorFamily& priors, const Objective& objective,
                                   const SimConfig& config, double epsilon) {
    config.validate();
    require(!policies.empty(), "capacity diagnostic needs at least one policy");
    require(epsilon > 0.0, "epsilon must be positive");
    for (std::size_t n = 1; n < policies.size(); ++n)
        require(policies[n].includes(policies[n - 1]),
                "capacity diagnostic needs a nondecreasing policy sequence");
    (void)objective;

    std::vector<Target> targets;
    for (const auto& p : policies) targets.push_back(component_of(x, p));
    const std::size_t count = targets.size();
    const std::size_t last = count - 1;

    CapacityReport report;
    report.rows.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
        report.rows[n].n = n + 1;
        report.rows[n].sup_freq_time = -1.0;
        report.rows[n].sup_freq_state = -1.0;
    }

    const std::int64_t shards = (config.n_paths + kShardSize - 1) / kShardSize;
    for (const ParamPoint& theta : priors.sample_grid()) {
        const Dynamics dyn = make_dynamics(priors, theta, config);
        struct ShardCounts {
            std::vector<std::int64_t> time;
            std::vector<std::int64_t> state;
            std::int64_t violations = 0;
        };
        std::vector<ShardCounts> counts(static_cast<std::size_t>(shards));
        parallel_for(counts.size(), config.threads, [&](std::size_t s) {
            ShardCounts c{std::vector<std::int64_t>(count, 0), std::vector<std::int64_t>(count, 0), 0};
            std::vector<Hit> hits(count);
            const std::int64_t begin = static_cast<std::int64_t>(s) * kShardSize;
            const std::int64_t end = std::min(begin + kShardSize, config.n_paths);
            for (std::int64_t i = begin; i < end; ++i) {
                simulate_path(x, targets, dyn, config, static_cast<std::uint64_t>(i), hits);
                const Hit& h0 = hits[last];
                for (std::size_t n = 0; n < count; ++n) {
                    if (n + 1 < count && hits[n].time < hits[n + 1].time) ++c.violations;
                    if (std::abs(hits[n].time - h0.time) >= epsilon) ++c.time[n];
                    if (hits[n].hit && std::abs(hits[n].state - h0.state) >= epsilon) ++c.state[n];
                }
            }
            counts[s] = std::move(c);
        });
        std::vector<std::int64_t> time(count, 0), state(count, 0);
        for (const auto& c : counts) {
            for (std::size_t n = 0; n < count; ++n) {
                time[n] += c.time[n];
                state[n] += c.state[n];
            }
            report.monotonicity_violations += c.violations;
        }
        report.paths_checked += config.n_paths;
        const auto paths = static_cast<double>(config.n_paths);
        for (std::size_t n = 0; n < count; ++n) {
            const double ft = static_cast<double>(time[n]) / paths;
            const double fs = static_cast<double>(state[n]) / paths;
            if (ft > report.rows[n].sup_freq_time) {
                report.rows[n].sup_freq_time = ft;
                report.rows[n].argsup_time = theta;
            }
            if (fs > report.rows[n].sup_freq_state) {
                report.rows[n].sup_freq_state = fs;
                report.rows[n].argsup_state = theta;
            }
        }
    }
    return report;
}

double put_monitoring_bias_bound(double x, double a, double strike, double discount, double sigma,
                                 double dt) {
    require(x >= a && a > 0.0 && sigma > 0.0 && dt > 0.0, "bias bound needs x >= a > 0");
    const double m = 2.0 * discount / (sigma * sigma);
    auto value = [&](double barrier) {
        return std::max(strike - barrier, 0.0) * std::pow(barrier / x, m);
    };
    const double shifted = a * std::exp(-kMonitoringShift * sigma * std::sqrt(dt));
    return 2.0 * std::abs(value(shifted) - value(a));
}

}  // namespace equistop
