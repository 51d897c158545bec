#pragma once

// Configuration ingestion and orchestration behind the `equistop` executable.
//
//   equistop <mode> --config <path> [--threads N] [--out DIR]
//
// Modes: analytic, iterate, verify, compare, mc-check, capacity-diag.
// Exit codes: 0 success, 1 configuration error, 2 numerical failure or
// non-convergence (the partial trace is written as trace_partial.csv).

#include "equistop/analytic_gbm.hpp"
#include "equistop/fixed_point.hpp"
#include "equistop/mc_oracle.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace equistop::cli {

enum class Mode { analytic, iterate, verify, compare, mc_check, capacity_diag };

std::optional<Mode> parse_mode(std::string_view name);
const char* to_string(Mode mode);

/// Configuration problems; the message names the offending key or the
/// line/column of a JSON syntax error.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// How a policy is chosen from the configuration.
struct PolicySpec {
    enum class Kind { empty, full, payoff_support, threshold, optimal, file };
    Kind kind = Kind::empty;
    double threshold = 0.0;
    std::string path;
};

struct MonteCarloCase {
    double x;
    double a;
    std::optional<double> sigma;  // single prior when set, inf/sup over the band otherwise
};

struct RunConfig {
    gbm::PutGbmProblem problem{};
    int n_points = 2000;
    std::pair<double, double> truncation{0.0, 0.0};
    int prior_samples = 17;
    FixedPointConfig fixed_point;
    PolicySpec seed;
    int max_iter = 0;
    PolicySpec verify_policy;
    PolicySpec compare_a;
    PolicySpec compare_b;
    std::vector<double> analytic_x;
    std::vector<double> analytic_a;
    SimConfig sim;
    std::vector<MonteCarloCase> mc_cases;
    double capacity_x = 0.0;
    double capacity_epsilon = 0.05;
    int capacity_count = 10;
    int capacity_grid_points = 20000;
    std::filesystem::path out_dir = ".";
    std::filesystem::path config_dir = ".";
};

/// Parses and validates a configuration for `mode`. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path, Mode mode);
RunConfig parse_config(std::string_view json_text, Mode mode,
                       const std::filesystem::path& config_dir = ".");

struct RunOptions {
    int threads = 0;
    std::optional<std::filesystem::path> out_dir;
};

/// Runs one mode end to end, writing CSV outputs; returns the exit code.
int run(Mode mode, const std::filesystem::path& config_path, const RunOptions& options,
        std::ostream& out, std::ostream& err);

/// One line per grid point: `x,0|1`.
void write_mask_file(const std::filesystem::path& path, const GridPolicy& policy);
GridPolicy read_mask_file(const std::filesystem::path& path, GridPtr grid);

/// Shortest decimal text with 17 significant digits.
std::string format_number(double v);

}  // namespace equistop::cli
