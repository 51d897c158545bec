#include "equistop/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"equistop: equilibrium stopping under volatility ambiguity"};
    std::string mode_name;
    std::string config;
    int threads = 0;
    std::string out_dir;
    app.add_option("mode", mode_name, "analytic | iterate | verify | compare | mc-check | capacity-diag")
        ->required();
    app.add_option("--config", config, "JSON configuration file")->required();
    app.add_option("--threads", threads, "worker threads (default: EQUISTOP_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const auto mode = equistop::cli::parse_mode(mode_name);
    if (!mode) {
        std::cerr << "config error: unknown mode '" << mode_name << "'\n";
        return 1;
    }
    equistop::cli::RunOptions options;
    options.threads = threads;
    if (!out_dir.empty()) options.out_dir = out_dir;
    return equistop::cli::run(*mode, config, options, std::cout, std::cerr);
}
