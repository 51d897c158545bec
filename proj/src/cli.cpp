#include "equistop/cli.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace equistop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<Mode> parse_mode(std::string_view name) {
    if (name == "analytic") return Mode::analytic;
    if (name == "iterate") return Mode::iterate;
    if (name == "verify") return Mode::verify;
    if (name == "compare") return Mode::compare;
    if (name == "mc-check") return Mode::mc_check;
    if (name == "capacity-diag") return Mode::capacity_diag;
    return std::nullopt;
}

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::analytic: return "analytic";
        case Mode::iterate: return "iterate";
        case Mode::verify: return "verify";
        case Mode::compare: return "compare";
        case Mode::mc_check: return "mc-check";
        case Mode::capacity_diag: return "capacity-diag";
    }
    return "unknown";
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// ---- config reading -------------------------------------------------------

const json* lookup(const json& root, std::string_view dotted) {
    const json* node = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start));
        if (!node->is_object()) return nullptr;
        auto it = node->find(key);
        if (it == node->end()) return nullptr;
        node = &*it;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return node;
}

const json& required(const json& root, std::string_view key) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) throw ConfigError("missing key '" + std::string(key) + "'");
    return *node;
}

double as_number(const json& node, std::string_view key) {
    if (!node.is_number()) throw ConfigError("key '" + std::string(key) + "' must be a number");
    return node.get<double>();
}

double number(const json& root, std::string_view key, std::optional<double> fallback = {}) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) {
        if (fallback) return *fallback;
        throw ConfigError("missing key '" + std::string(key) + "'");
    }
    return as_number(*node, key);
}

long integer(const json& root, std::string_view key, long fallback) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) return fallback;
    if (!node->is_number_integer())
        throw ConfigError("key '" + std::string(key) + "' must be an integer");
    return node->get<long>();
}

bool boolean(const json& root, std::string_view key, bool fallback) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) return fallback;
    if (!node->is_boolean()) throw ConfigError("key '" + std::string(key) + "' must be true or false");
    return node->get<bool>();
}

std::string text(const json& root, std::string_view key, std::string fallback) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) return fallback;
    if (!node->is_string()) throw ConfigError("key '" + std::string(key) + "' must be a string");
    return node->get<std::string>();
}

std::pair<double, double> number_pair(const json& node, std::string_view key) {
    if (!node.is_array() || node.size() != 2)
        throw ConfigError("key '" + std::string(key) + "' must be a [low, high] pair");
    return {as_number(node[0], key), as_number(node[1], key)};
}

std::optional<gbm::Band> band(const json& root, std::string_view key) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) return std::nullopt;
    auto [lo, hi] = number_pair(*node, key);
    return gbm::Band{lo, hi};
}

std::vector<double> number_list(const json& root, std::string_view key,
                                 std::vector<double> fallback) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) return fallback;
    if (!node->is_array()) throw ConfigError("key '" + std::string(key) + "' must be a list");
    std::vector<double> out;
    for (const auto& v : *node) out.push_back(as_number(v, key));
    return out;
}

PolicySpec policy_spec(const json& root, std::string_view key, PolicySpec fallback) {
    const json* node = lookup(root, key);
    if (!node || node->is_null()) return fallback;
    const std::string k(key);
    PolicySpec spec;
    std::string kind;
    if (node->is_string()) {
        kind = node->get<std::string>();
    } else if (node->is_object()) {
        kind = text(*node, "kind", "");
        if (kind.empty()) throw ConfigError("missing key '" + k + ".kind'");
    } else {
        throw ConfigError("key '" + k + "' must be a policy name or object");
    }
    if (kind == "empty") {
        spec.kind = PolicySpec::Kind::empty;
    } else if (kind == "full") {
        spec.kind = PolicySpec::Kind::full;
    } else if (kind == "payoff-support") {
        spec.kind = PolicySpec::Kind::payoff_support;
    } else if (kind == "optimal") {
        spec.kind = PolicySpec::Kind::optimal;
    } else if (kind == "threshold") {
        spec.kind = PolicySpec::Kind::threshold;
        if (!node->is_object()) throw ConfigError("missing key '" + k + ".threshold'");
        spec.threshold = number(*node, "threshold");
    } else if (kind == "file") {
        spec.kind = PolicySpec::Kind::file;
        if (!node->is_object()) throw ConfigError("missing key '" + k + ".path'");
        spec.path = text(*node, "path", "");
        if (spec.path.empty()) throw ConfigError("missing key '" + k + ".path'");
    } else {
        throw ConfigError("key '" + k + "' has unknown policy kind '" + kind + "'");
    }
    return spec;
}

PolicySpec optimal_spec() {
    PolicySpec s;
    s.kind = PolicySpec::Kind::optimal;
    return s;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

// ---- output ---------------------------------------------------------------

class CsvFile {
public:
    CsvFile(const fs::path& path, std::string_view header) : path_(path), stream_(path) {
        if (!stream_) throw InvalidInput("cannot write " + path.string());
        if (!header.empty()) stream_ << header << '\n';
    }
    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((stream_ << (first ? "" : ",") << cell(fields), first = false), ...);
        stream_ << '\n';
    }
    const fs::path& path() const { return path_; }

private:
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I v) { return std::to_string(v); }

    fs::path path_;
    std::ofstream stream_;
};

std::string join(const ParamPoint& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ";" : "") + format_number(p[i]);
    return s;
}

struct Context {
    const RunConfig& cfg;
    fs::path out;
    std::ostream& log;
    Objective objective;
    PriorFamily priors;

    GridPtr grid() const {
        return build_grid(StateInterval::positive_half_line(), cfg.n_points, cfg.truncation);
    }

    GridPolicy policy(const PolicySpec& spec, const GridPtr& g) const {
        switch (spec.kind) {
            case PolicySpec::Kind::empty: return GridPolicy::empty(g);
            case PolicySpec::Kind::full: return GridPolicy::full(g);
            case PolicySpec::Kind::payoff_support: return GridPolicy::payoff_support(g, objective);
            case PolicySpec::Kind::threshold: return GridPolicy::lower_set(g, spec.threshold);
            case PolicySpec::Kind::optimal:
                return gbm::snapped_threshold_policy(g, gbm::a_star(cfg.problem));
            case PolicySpec::Kind::file: {
                fs::path p = spec.path;
                if (p.is_relative()) p = cfg.config_dir / p;
                return read_mask_file(p, g);
            }
        }
        throw InvalidInput("unknown policy kind");
    }

    void summary(const std::string& name,
                 const std::vector<std::pair<std::string, double>>& rows) const {
        CsvFile f(out / name, "quantity,value");
        for (const auto& [k, v] : rows) {
            f.row(k, v);
            log << k << " = " << format_number(v) << '\n';
        }
    }
};

void write_trace(const fs::path& path, const IterationTrace& trace) {
    CsvFile f(path, "step,added_points,cumulative_added,threshold_estimate,policy_size");
    std::size_t cumulative = 0;
    for (std::size_t k = 0; k < trace.policies.size(); ++k) {
        cumulative += trace.added[k];
        const auto a = trace.policies[k].lower_threshold();
        f.row(k, trace.added[k], cumulative, a.value_or(std::nan("")), trace.policies[k].count());
    }
}

void run_analytic(const Context& ctx) {
    const auto& p = ctx.cfg.problem;
    const gbm::ExponentPair m = gbm::exponents(p);
    const double a_star = gbm::a_star(p);
    ctx.summary("analytic_summary.csv", {
                                            {"strike", p.strike},
                                            {"discount", p.discount},
                                            {"alpha", p.alpha},
                                            {"sigma_low", p.sigma_band.low},
                                            {"sigma_high", p.sigma_band.high},
                                            {"m1", m.m1},
                                            {"m2", m.m2},
                                            {"a_star", a_star},
                                            {"boundary_slope_at_a_star",
                                             gbm::lambda_boundary_slope(a_star, p)},
                                        });
    CsvFile table(ctx.out / "lambda_table.csv", "x,a,lambda,payoff,value");
    for (double a : ctx.cfg.analytic_a)
        for (double x : ctx.cfg.analytic_x)
            if (x >= a)
                table.row(x, a, gbm::lambda_value(x, a, p), std::max(p.strike - x, 0.0),
                          gbm::value_of_equilibrium(x, a, p));
    CsvFile classes(ctx.out / "classification.csv", "a,class,crossing_point");
    for (double a : ctx.cfg.analytic_a) {
        const auto c = gbm::classify_policy(a, p);
        const double cross =
            c == gbm::PolicyClass::not_equilibrium ? gbm::crossing_point(a, p) : std::nan("");
        classes.row(a, gbm::to_string(c), cross);
    }
}

int run_iterate(const Context& ctx) {
    const GridPtr g = ctx.grid();
    const GridPolicy seed = ctx.policy(ctx.cfg.seed, g);
    const int max_iter = ctx.cfg.max_iter > 0 ? ctx.cfg.max_iter : static_cast<int>(g->size()) + 1;
    IterationTrace trace;
    try {
        trace = iterate_to_equilibrium(seed, ctx.objective, ctx.priors, max_iter,
                                       ctx.cfg.fixed_point);
    } catch (const NonConvergence& e) {
        write_trace(ctx.out / "trace_partial.csv", e.trace());
        throw;
    }
    write_trace(ctx.out / "trace.csv", trace);
    write_mask_file(ctx.out / "policy.csv", trace.final_policy());
    const double a_star = gbm::a_star(ctx.cfg.problem);
    const double threshold = trace.final_policy().lower_threshold().value_or(std::nan(""));
    ctx.summary("iterate_summary.csv", {
                                           {"theta_applications",
                                            static_cast<double>(trace.policies.size() - 1)},
                                           {"converged_step", static_cast<double>(*trace.converged_step)},
                                           {"threshold", threshold},
                                           {"a_star", a_star},
                                           {"threshold_minus_a_star", threshold - a_star},
                                           {"grid_spacing", g->spacing()},
                                       });
    return 0;
}

void run_verify(const Context& ctx) {
    const GridPtr g = ctx.grid();
    const GridPolicy policy = ctx.policy(ctx.cfg.verify_policy, g);
    const EquilibriumCheck check =
        is_equilibrium(policy, ctx.objective, ctx.priors, ctx.cfg.fixed_point);
    CsvFile w(ctx.out / "witnesses.csv", "index,x,kind");
    for (const auto& v : check.violations) w.row(v.index, v.x, to_string(v.kind));
    ctx.summary("verify_summary.csv",
                {
                    {"equilibrium", check.equilibrium ? 1.0 : 0.0},
                    {"violations", static_cast<double>(check.violations.size())},
                    {"threshold", policy.lower_threshold().value_or(std::nan(""))},
                    {"a_star", gbm::a_star(ctx.cfg.problem)},
                });
}

void run_compare(const Context& ctx) {
    const GridPtr g = ctx.grid();
    const GridPolicy a = ctx.policy(ctx.cfg.compare_a, g);
    const GridPolicy b = ctx.policy(ctx.cfg.compare_b, g);
    const DominanceReport report =
        compare_equilibria(a, b, ctx.objective, ctx.priors, ctx.cfg.fixed_point);
    CsvFile f(ctx.out / "compare.csv", "x,v_a,v_b,gap");
    for (std::size_t i = 0; i < g->size(); ++i)
        f.row((*g)[i], report.value_a[i], report.value_b[i], report.gap[i]);
    CsvFile s(ctx.out / "compare_summary.csv", "quantity,value");
    s.row("verdict", std::string(to_string(report.verdict)));
    s.row("max_violation", report.max_violation);
    s.row("tie_tol", resolve_tie_tol(ctx.cfg.fixed_point, ctx.objective));
    ctx.log << "verdict = " << to_string(report.verdict) << '\n';
}

void run_mc_check(const Context& ctx) {
    const auto& p = ctx.cfg.problem;
    CsvFile f(ctx.out / "mc_check.csv",
              "kind,x,a,sigma,estimate,std_error,n_absorbed,n_censored,analytic,z_score,bias_bound");
    for (const auto& c : ctx.cfg.mc_cases) {
        const GridPolicy policy = gbm::threshold_policy(c.a);
        if (c.sigma) {
            if (ctx.priors.kind() != PriorKind::gbm_vol_band)
                throw ConfigError("mc_check cases with 'sigma' need the plain volatility band");
            const auto est = estimate_hitting_value(c.x, policy, ctx.priors, {*c.sigma},
                                                    ctx.objective, ctx.cfg.sim);
            const double exact =
                (p.strike - c.a) * gbm::discounted_hitting_factor(c.x, c.a, p.discount, *c.sigma);
            const double bias =
                put_monitoring_bias_bound(c.x, c.a, p.strike, p.discount, *c.sigma, ctx.cfg.sim.dt);
            f.row("single", c.x, c.a, *c.sigma, est.mean, est.std_error, est.n_absorbed,
                  est.n_censored, exact, (est.mean - exact) / est.std_error, bias);
        } else {
            const auto est = empirical_maxmin(c.x, policy, ctx.priors, ctx.objective, ctx.cfg.sim);
            const double exact = gbm::lambda_value(c.x, c.a, p);
            std::int64_t absorbed = 0;
            std::int64_t censored = 0;
            for (const auto& e : est.per_prior) {
                absorbed += e.n_absorbed;
                censored += e.n_censored;
            }
            f.row("maxmin", c.x, c.a, std::nan(""), est.value, est.std_error, absorbed, censored,
                  exact, (est.value - exact) / est.std_error, std::nan(""));
        }
    }
}

void run_capacity(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const double a_star = gbm::a_star(cfg.problem);
    const GridPtr g = build_grid(StateInterval::positive_half_line(), cfg.capacity_grid_points,
                                 cfg.truncation);
    std::vector<GridPolicy> policies;
    std::vector<double> thresholds;
    for (int n = 1; n <= cfg.capacity_count; ++n) {
        thresholds.push_back(a_star - 1.0 / n);
        policies.push_back(GridPolicy::lower_set(g, thresholds.back()));
    }
    const CapacityReport report = capacity_diagnostic(cfg.capacity_x, policies, ctx.priors,
                                                      ctx.objective, cfg.sim, cfg.capacity_epsilon);
    CsvFile f(ctx.out / "capacity.csv",
              "n,threshold,sup_grid_freq_time,sup_grid_freq_state,argsup_time,argsup_state");
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        f.row(r.n, policies[i].lower_threshold().value_or(std::nan("")), r.sup_freq_time,
              r.sup_freq_state, join(r.argsup_time), join(r.argsup_state));
    }
    ctx.summary("capacity_summary.csv",
                {
                    {"epsilon", cfg.capacity_epsilon},
                    {"monotonicity_violations", static_cast<double>(report.monotonicity_violations)},
                    {"paths_checked", static_cast<double>(report.paths_checked)},
                    {"priors_sampled", static_cast<double>(ctx.priors.sample_grid().size())},
                });
}

int env_threads() {
    const char* v = std::getenv("EQUISTOP_THREADS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    return (end && *end == '\0' && n > 0) ? static_cast<int>(n) : 0;
}

}  // namespace

RunConfig parse_config(std::string_view json_text, Mode mode, const fs::path& config_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("configuration must be a JSON object");

    RunConfig cfg;
    cfg.config_dir = config_dir;
    auto& p = cfg.problem;
    p.strike = number(root, "problem.strike");
    p.discount = number(root, "problem.discount");
    p.alpha = number(root, "problem.alpha");
    const auto sigma = band(root, "problem.sigma_band");
    if (!sigma) throw ConfigError("missing key 'problem.sigma_band'");
    p.sigma_band = *sigma;
    p.rate_band = band(root, "problem.rate_band");
    p.drift_band = band(root, "problem.drift_band");
    try {
        p.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }

    cfg.n_points = static_cast<int>(integer(root, "grid.n_points", 2000));
    cfg.truncation = {p.strike / 100.0, 10.0 * p.strike};
    if (const json* t = lookup(root, "grid.truncation"); t && !t->is_null())
        cfg.truncation = number_pair(*t, "grid.truncation");

    cfg.prior_samples = static_cast<int>(integer(root, "prior_grid.samples", 17));
    auto& engine = cfg.fixed_point.engine;
    engine.refine = boolean(root, "prior_grid.refine", true);
    engine.refine_rel_tol = number(root, "prior_grid.refine_rel_tol", 1e-6);
    engine.n_nodes = static_cast<int>(integer(root, "solver.n_nodes", engine.n_nodes));
    engine.nodes_per_cell =
        static_cast<int>(integer(root, "solver.nodes_per_cell", engine.nodes_per_cell));
    engine.far_field_factor = number(root, "solver.far_field_factor", engine.far_field_factor);
    cfg.fixed_point.tie_tol = number(root, "solver.tie_tol", -1.0);

    cfg.seed = policy_spec(root, "iteration.seed", {});
    cfg.max_iter = static_cast<int>(integer(root, "iteration.max_iter", 0));
    cfg.verify_policy = policy_spec(root, "verify.policy", optimal_spec());
    cfg.compare_a = policy_spec(root, "compare.policy_a", optimal_spec());
    if (mode == Mode::compare) {
        if (!lookup(root, "compare.policy_b")) throw ConfigError("missing key 'compare.policy_b'");
        cfg.compare_b = policy_spec(root, "compare.policy_b", {});
    }

    cfg.analytic_a = number_list(root, "analytic.a_values", linspace(p.strike / 20, p.strike, 20));
    cfg.analytic_x =
        number_list(root, "analytic.x_values", linspace(p.strike / 10, 3 * p.strike, 30));

    SimConfig& sim = cfg.sim;
    sim = SimConfig::for_objective(Objective::put(p.discount, p.alpha, p.strike));
    sim.n_paths = integer(root, "sim.n_paths", sim.n_paths);
    sim.dt = number(root, "sim.dt", sim.dt);
    sim.horizon = number(root, "sim.horizon", sim.horizon);
    sim.rng_seed = static_cast<std::uint64_t>(integer(root, "sim.rng_seed", static_cast<long>(sim.rng_seed)));
    const std::string scheme = text(root, "sim.scheme", "exact-gbm");
    if (scheme == "exact-gbm") {
        sim.scheme = Scheme::exact_gbm;
    } else if (scheme == "euler") {
        sim.scheme = Scheme::euler;
    } else {
        throw ConfigError("key 'sim.scheme' must be 'exact-gbm' or 'euler'");
    }
    sim.bridge_correction = boolean(root, "sim.bridge_correction", false);
    sim.adaptive_steps = boolean(root, "sim.adaptive_steps", true);

    if (mode == Mode::mc_check) {
        const json& cases = required(root, "mc_check.cases");
        if (!cases.is_array() || cases.empty())
            throw ConfigError("key 'mc_check.cases' must be a non-empty list");
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const std::string prefix = "mc_check.cases[" + std::to_string(i) + "]";
            const json& c = cases[i];
            if (!c.is_object()) throw ConfigError("key '" + prefix + "' must be an object");
            MonteCarloCase mc{};
            if (!c.contains("x")) throw ConfigError("missing key '" + prefix + ".x'");
            if (!c.contains("a")) throw ConfigError("missing key '" + prefix + ".a'");
            mc.x = as_number(c["x"], prefix + ".x");
            mc.a = as_number(c["a"], prefix + ".a");
            if (c.contains("sigma")) mc.sigma = as_number(c["sigma"], prefix + ".sigma");
            if (!(mc.a > 0.0 && mc.a < mc.x && mc.a <= p.strike))
                throw ConfigError("key '" + prefix + "' needs 0 < a < x and a <= strike");
            cfg.mc_cases.push_back(mc);
        }
    }
    if (mode == Mode::capacity_diag) {
        cfg.capacity_x = number(root, "capacity.x");
        cfg.capacity_epsilon = number(root, "capacity.epsilon", 0.05);
        cfg.capacity_count = static_cast<int>(integer(root, "capacity.count", 10));
        cfg.capacity_grid_points = static_cast<int>(integer(root, "capacity.grid_points", 20000));
        if (cfg.capacity_count < 1) throw ConfigError("key 'capacity.count' must be positive");
    }
    cfg.out_dir = text(root, "output.dir", ".");
    if (cfg.out_dir.is_relative()) cfg.out_dir = config_dir / cfg.out_dir;

    try {
        if (mode == Mode::mc_check || mode == Mode::capacity_diag) sim.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("sim: ") + e.what());
    }
    if (cfg.n_points < 3) throw ConfigError("key 'grid.n_points' must be at least 3");
    if (cfg.prior_samples < 1) throw ConfigError("key 'prior_grid.samples' must be positive");
    return cfg;
}

RunConfig load_config(const fs::path& path, Mode mode) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), mode, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void write_mask_file(const fs::path& path, const GridPolicy& policy) {
    CsvFile f(path, "");
    for (std::size_t i = 0; i < policy.size(); ++i) f.row(policy.grid()[i], policy[i] ? 1 : 0);
}

GridPolicy read_mask_file(const fs::path& path, GridPtr grid) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read mask file " + path.string());
    std::vector<bool> mask;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (comma == std::string::npos) throw InvalidInput(where + ": expected 'x,0|1'");
        const std::string flag = line.substr(comma + 1);
        if (flag != "0" && flag != "1") throw InvalidInput(where + ": flag must be 0 or 1");
        const double x = std::strtod(line.substr(0, comma).c_str(), nullptr);
        const std::size_t i = mask.size();
        if (i >= grid->size()) throw InvalidInput(where + ": more lines than grid points");
        const double expect = (*grid)[i];
        if (std::abs(x - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
            throw InvalidInput(where + ": state does not match grid point " + format_number(expect));
        mask.push_back(flag == "1");
    }
    if (mask.size() != grid->size())
        throw InvalidInput(path.string() + ": expected " + std::to_string(grid->size()) + " lines");
    return GridPolicy(std::move(grid), std::move(mask));
}

int run(Mode mode, const fs::path& config_path, const RunOptions& options, std::ostream& out,
        std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path, mode);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    }
    const int threads = options.threads > 0 ? options.threads : env_threads();
    cfg.fixed_point.engine.threads = threads;
    cfg.sim.threads = threads;
    const fs::path out_dir = options.out_dir.value_or(cfg.out_dir);

    try {
        fs::create_directories(out_dir);
        Context ctx{cfg, out_dir, out, cfg.problem.objective(), cfg.problem.priors(cfg.prior_samples)};
        switch (mode) {
            case Mode::analytic: run_analytic(ctx); break;
            case Mode::iterate: run_iterate(ctx); break;
            case Mode::verify: run_verify(ctx); break;
            case Mode::compare: run_compare(ctx); break;
            case Mode::mc_check: run_mc_check(ctx); break;
            case Mode::capacity_diag: run_capacity(ctx); break;
        }
    } catch (const NonConvergence& e) {
        err << "non-convergence: " << e.what() << " (partial trace in "
            << (out_dir / "trace_partial.csv").string() << ")\n";
        return 2;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const InvalidInput& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace equistop::cli
