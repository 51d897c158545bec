// Acceptance checks for the put/GBM benchmark (K = 10, r = 0.05, sigma in
// [0.2, 0.4]). Prints one PASS/FAIL line per criterion; exit status 0 iff
// every selected criterion passes.

#include "equistop/analytic_gbm.hpp"
#include "equistop/fixed_point.hpp"
#include "equistop/mc_oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace equistop;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<Outcome()> check;
};

gbm::PutGbmProblem benchmark(double alpha = 0.5) {
    gbm::PutGbmProblem p{};
    p.strike = 10.0;
    p.discount = 0.05;
    p.sigma_band = {0.2, 0.4};
    p.alpha = alpha;
    return p;
}

GridPtr benchmark_grid(int n_points) {
    return build_grid(StateInterval::positive_half_line(), n_points, std::pair{0.1, 100.0});
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome closed_form_threshold() {
    constexpr double kRelTol = 1e-12;
    const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    double worst = 0.0;
    double prev = -1.0;
    bool increasing = true;
    for (double alpha : alphas) {
        // Independent arithmetic in long double.
        const long double r = 0.05L, lo = 0.2L, hi = 0.4L, K = 10.0L;
        const long double m1 = 2 * r / (lo * lo);
        const long double m2 = 2 * r / (hi * hi);
        const long double w = m1 * alpha + m2 * (1 - alpha);
        const double expect = static_cast<double>(w / (1 + w) * K);
        const double got = gbm::a_star(benchmark(alpha));
        worst = std::max(worst, std::abs(got - expect) / expect);
        increasing = increasing && got > prev;
        prev = got;
    }
    return {worst <= kRelTol && increasing,
            fmt("max rel err %.2e (tol %.0e), strictly increasing in alpha: %s", worst, kRelTol,
                increasing ? "yes" : "no")};
}

double max_lambda_error(double a, int n_nodes) {
    const auto problem = benchmark();
    // Grid whose first point is a: the policy (0, a] exactly, with 50 probes in (a, 5K).
    const auto grid = build_grid(StateInterval::positive_half_line(), 52, std::pair{a, 5 * problem.strike});
    std::vector<bool> mask(grid->size(), false);
    mask[0] = true;
    ValueEngineConfig cfg;
    cfg.n_nodes = n_nodes;
    const auto prof = alpha_maxmin_value(GridPolicy(grid, mask), problem.objective(), problem.priors(), cfg);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < grid->size(); ++i) {
        const double exact = gbm::lambda_value((*grid)[i], a, problem);
        worst = std::max(worst, std::abs(prof.value[i] - exact) / exact);
    }
    return worst;
}

Outcome ode_vs_closed_form() {
    constexpr double kRelTol = 1e-4;
    constexpr double kMinRatio = 3.0;
    const auto problem = benchmark();
    const double as = gbm::a_star(problem);
    bool ok = true;
    std::ostringstream detail;
    for (double a : {0.5 * as, as, 0.5 * (as + problem.strike)}) {
        const double fine = max_lambda_error(a, 4000);
        const double coarse = max_lambda_error(a, 2000);
        const double ratio = coarse / fine;
        ok = ok && fine <= kRelTol && ratio >= kMinRatio;
        detail << fmt("a=%.4f err %.2e ratio %.2f; ", a, fine, ratio);
    }
    detail << fmt("(tol %.0e, ratio >= %.0f)", kRelTol, kMinRatio);
    return {ok, detail.str()};
}

Outcome fixed_point_recovery() {
    const auto problem = benchmark();
    const double as = gbm::a_star(problem);
    const auto grid = benchmark_grid(2000);
    const double h = grid->spacing();
    const auto objective = problem.objective();
    const auto priors = problem.priors();
    constexpr int kMaxSteps = 2000;

    bool empty_ok = false;
    std::string empty_detail;
    try {
        const auto trace = iterate_to_equilibrium(GridPolicy::empty(grid), objective, priors, kMaxSteps);
        const auto threshold = trace.final_policy().lower_threshold();
        const double a_bar = threshold.value_or(std::nan(""));
        empty_ok = threshold && std::abs(a_bar - as) <= 2 * h;
        empty_detail = fmt("empty seed: %zu steps, threshold %.6f vs a* %.6f (%.1f cells)",
                           trace.policies.size() - 1, a_bar, as, (a_bar - as) / h);
    } catch (const NonConvergence& e) {
        empty_detail = fmt("empty seed: no convergence in %d steps", kMaxSteps);
    }

    bool seeded_ok = true;
    int seeds = 0;
    for (double a : {as, 7.0, 8.5, problem.strike}) {
        const GridPolicy seed = gbm::snapped_threshold_policy(grid, a);
        const auto trace = iterate_to_equilibrium(seed, objective, priors, kMaxSteps);
        seeded_ok = seeded_ok && trace.converged_step == 0u && trace.final_policy() == seed;
        ++seeds;
    }
    return {empty_ok && seeded_ok,
            empty_detail + fmt("; seeds (0,a], a >= a*: %d/%d fixed after one step", seeded_ok ? seeds : 0, seeds)};
}

Outcome classification_equivalence() {
    const auto problem = benchmark();
    const double as = gbm::a_star(problem);
    const auto grid = benchmark_grid(2000);
    const double h = grid->spacing();
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> u(0.0, problem.strike);
    int agree = 0;
    int excused = 0;
    int disagree = 0;
    for (int k = 0; k < 20; ++k) {
        double a = u(rng);
        if (k == 19) a = problem.strike;
        if (a <= 0.0) a = problem.strike / 2;
        const bool analytic = gbm::classify_policy(a, problem) == gbm::PolicyClass::equilibrium;
        const bool numeric =
            is_equilibrium(GridPolicy::lower_set(grid, a), problem.objective(), problem.priors()).equilibrium;
        if (analytic == numeric) {
            ++agree;
        } else if (std::abs(a - as) < 2 * h) {
            ++excused;
        } else {
            ++disagree;
        }
    }
    return {disagree == 0,
            fmt("%d agree, %d within 2 cells of a*, %d disagree (of 20)", agree, excused, disagree)};
}

Outcome dominance() {
    const auto problem = benchmark();
    const double as = gbm::a_star(problem);
    const auto grid = benchmark_grid(2000);
    const auto objective = problem.objective();
    const auto priors = problem.priors();
    FixedPointConfig cfg;
    const double tol = resolve_tie_tol(cfg, objective);
    const GridPolicy best = gbm::snapped_threshold_policy(grid, as);
    double worst = 0.0;
    int confirmed = 0;
    for (int k = 1; k <= 10; ++k) {
        const double a = as + (problem.strike - as) * k / 10.0;
        const auto report = compare_equilibria(best, gbm::snapped_threshold_policy(grid, a), objective, priors, cfg);
        const bool ok = report.verdict == Dominance::a_dominates || report.verdict == Dominance::equal;
        confirmed += ok;
        worst = std::max(worst, report.max_violation);
    }
    return {confirmed == 10 && worst <= tol,
            fmt("%d/10 dominated, max violation %.2e (tie_tol %.0e)", confirmed, worst, tol)};
}

Outcome monte_carlo_consistency() {
    const auto problem = benchmark();
    const auto objective = problem.objective();
    const auto priors = problem.priors();
    SimConfig cfg = SimConfig::for_objective(objective);
    cfg.n_paths = 200000;
    cfg.dt = 1e-3;
    struct Triple {
        double x, a, sigma;
    };
    const Triple triples[] = {{8.0, 6.0, 0.2}, {8.0, 6.0, 0.4}, {12.0, 6.1, 0.3}, {7.0, 5.0, 0.25}, {15.0, 9.0, 0.35}};
    int within = 0;
    double worst_z = 0.0;
    for (const auto& t : triples) {
        const auto est = estimate_hitting_value(t.x, gbm::threshold_policy(t.a), priors, {t.sigma}, objective, cfg);
        const double exact = (problem.strike - t.a) * gbm::discounted_hitting_factor(t.x, t.a, problem.discount, t.sigma);
        const double bias = put_monitoring_bias_bound(t.x, t.a, problem.strike, problem.discount, t.sigma, cfg.dt);
        const double dev = std::abs(est.mean - exact);
        within += dev <= 3 * est.std_error + bias;
        worst_z = std::max(worst_z, dev / (3 * est.std_error + bias));
    }
    return {within == 5, fmt("%d/5 within 3 se + bias bound (worst |dev| / allowance %.2f)", within, worst_z)};
}

Outcome lambda_properties() {
    const auto p = benchmark();
    const double as = gbm::a_star(p);
    const double K = p.strike;
    std::mt19937_64 rng(8675309);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng); };
    int v1 = 0, v2 = 0, v3 = 0, v4 = 0;

    for (int i = 0; i < 100; ++i) {  // (i) decreasing and convex in x
        const double a = uniform(0.05, K - 0.05);
        const double x = a * uniform(1.001, 5.0);
        const double h = 1e-3 * (x - a);
        const double lm = gbm::lambda_value(x - h, a, p), l0 = gbm::lambda_value(x, a, p),
                     lp = gbm::lambda_value(x + h, a, p);
        v1 += !(lm > l0 && l0 > lp && lm - 2 * l0 + lp > 0.0);
    }
    for (int i = 0; i < 100; ++i) {  // (ii) unique crossing below a*
        const double a = uniform(0.05, as - 1e-3);
        const double xs = gbm::crossing_point(a, p);
        auto gap = [&](double x) { return gbm::lambda_value(x, a, p) - std::max(K - x, 0.0); };
        bool ok = xs > a && xs < K && std::abs(gap(xs)) < 1e-9;
        ok = ok && gap(0.5 * (a + xs)) < 0.0 && gap(2 * xs) > 0.0;
        int changes = 0;
        double prev = gap(a + 1e-9 * a);
        for (int k = 1; k <= 400; ++k) {
            const double g = gap(a + (3 * K - a) * k / 400.0);
            changes += (g > 0.0) != (prev > 0.0);
            prev = g;
        }
        v2 += !(ok && changes == 1);
    }
    for (int i = 0; i < 100; ++i) {  // (iii) no crossing at or above a*
        const double a = uniform(as, K);
        bool ok = true;
        for (int k = 1; k <= 50; ++k) {
            const double x = a + (3 * K - a) * k / 50.0 * uniform(0.9, 1.0);
            ok = ok && gbm::lambda_value(x, a, p) > std::max(K - x, 0.0);
        }
        v3 += !ok;
    }
    for (int i = 0; i < 100; ++i) {  // (iv) decreasing in a on (a*, x ^ K)
        const double x = uniform(as + 1e-3, 3 * K);
        const double top = std::min(x, K);
        double a1 = uniform(as, top), a2 = uniform(as, top);
        if (a1 > a2) std::swap(a1, a2);
        v4 += !(a1 == a2 || gbm::lambda_value(x, a1, p) > gbm::lambda_value(x, a2, p));
    }
    const int total = v1 + v2 + v3 + v4;
    return {total == 0, fmt("violations (i) %d, (ii) %d, (iii) %d, (iv) %d of 100 probes each", v1, v2, v3, v4)};
}

Outcome capacity() {
    const auto problem = benchmark();
    const double as = gbm::a_star(problem);
    const auto grid = benchmark_grid(20000);
    std::vector<GridPolicy> seq;
    for (int n = 1; n <= 10; ++n) seq.push_back(GridPolicy::lower_set(grid, as - 1.0 / n));
    const auto objective = problem.objective();
    SimConfig cfg = SimConfig::for_objective(objective);
    cfg.n_paths = 10000;
    const auto report = capacity_diagnostic(8.0, seq, problem.priors(), objective, cfg, 0.05);

    auto trend_ok = [&](auto field) {
        std::vector<double> avg;
        for (std::size_t k = 0; k + 1 < report.rows.size(); ++k)
            avg.push_back(0.5 * (field(report.rows[k]) + field(report.rows[k + 1])));
        for (std::size_t k = 1; k < avg.size(); ++k)
            if (avg[k] > avg[k - 1]) return false;
        return field(report.rows.back()) < field(report.rows.front());
    };
    const bool time_ok = trend_ok([](const CapacityRow& r) { return r.sup_freq_time; });
    const bool state_ok = trend_ok([](const CapacityRow& r) { return r.sup_freq_state; });
    return {time_ok && state_ok && report.monotonicity_violations == 0,
            fmt("time trend %s, state trend %s, pathwise violations %lld over %lld paths",
                time_ok ? "ok" : "broken", state_ok ? "ok" : "broken",
                static_cast<long long>(report.monotonicity_violations),
                static_cast<long long>(report.paths_checked))};
}

Outcome extension_modes() {
    constexpr double kRelTol = 1e-12;
    double worst = 0.0;
    for (double alpha : {0.0, 0.5, 1.0}) {
        const auto plain = benchmark(alpha);
        auto rate = plain;
        rate.rate_band = gbm::Band{plain.discount, plain.discount};
        auto drift = plain;
        drift.drift_band = gbm::Band{plain.discount, plain.discount};
        const auto m = gbm::exponents(plain);
        for (const auto& ext : {rate, drift}) {
            const auto e = gbm::exponents(ext);
            worst = std::max({worst, std::abs(e.m1 - m.m1) / m.m1, std::abs(e.m2 - m.m2) / m.m2,
                              std::abs(gbm::a_star(ext) - gbm::a_star(plain)) / gbm::a_star(plain)});
        }
    }
    return {worst <= kRelTol, fmt("max rel deviation %.2e (tol %.0e)", worst, kRelTol)};
}

Outcome monotone_operator() {
    const auto problem = benchmark();
    const auto grid = benchmark_grid(2000);
    std::mt19937_64 rng(1234);
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const double p = 0.01 + 0.6 * (k % 10) / 10.0;
        std::bernoulli_distribution coin(p);
        std::vector<bool> mask(grid->size());
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = coin(rng);
        const GridPolicy seed(grid, mask);
        try {
            violations += !theta(seed, problem.objective(), problem.priors()).includes(seed);
        } catch (const NumericalFailure&) {
            ++violations;
        }
    }
    return {violations == 0, fmt("%d violations of Theta(R) >= R over 100 random masks", violations)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equistop acceptance checks"};
    std::vector<int> only;
    app.add_option("--criterion", only, "run only these criteria (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "closed-form threshold", 1.0, closed_form_threshold},
        {2, "ODE value vs closed form", 30.0, ode_vs_closed_form},
        {3, "fixed-point recovery", 120.0, fixed_point_recovery},
        {4, "classification equivalence", 300.0, classification_equivalence},
        {5, "dominance of the optimal equilibrium", 120.0, dominance},
        {6, "Monte Carlo consistency", 180.0, monte_carlo_consistency},
        {7, "Lambda property suite", 10.0, lambda_properties},
        {8, "capacity diagnostic", 300.0, capacity},
        {9, "extension modes collapse", 1.0, extension_modes},
        {10, "monotone operator", 300.0, monotone_operator},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget_seconds;
        const bool pass = out.pass && in_time;
        failures += !pass;
        std::printf("%s criterion %2d %-38s %s [%.2fs / %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                    out.detail.c_str(), secs, c.budget_seconds, in_time ? "" : " over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
