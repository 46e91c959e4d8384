#include <CLI11.hpp>
#include <iostream>

#include "pnpde/config.hpp"
#include "pnpde/errors.hpp"
#include "pnpde/experiment.hpp"
#include "pnpde/problems.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path, const pnpde::RunOptions& options,
             bool timings) {
    pnpde::ExperimentConfig config;
    try {
        config = pnpde::load_config(config_path);
        if (timings) config.deterministic = false;
        // Validate the cell subset before any output is produced.
        (void)pnpde::sweep_cells(config, options.cells);
    } catch (const pnpde::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return pnpde::kExitConfig;
    }
    try {
        if (command == "compare") return pnpde::compare_experiment(config, options, std::cout);
        return pnpde::run_experiment(config, options, std::cout);
    } catch (const pnpde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return pnpde::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pnpde::kExitSolver;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic solver for nonlinear evolutionary PDEs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string cells;
    std::size_t max_workers = 1;
    bool timings = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "Experiment config file")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides PNPDE_OUT_DIR and the config)");
        sub->add_option("--max-workers", max_workers, "Number of sweep cells solved concurrently")
            ->check(CLI::PositiveNumber);
        sub->add_option("--cells", cells, "Subset of sweep cells, as i:j[,i:j...]");
        sub->add_flag("--timings", timings, "Write measured runtime_s to metrics.csv instead of 0");
    };
    auto* run = app.add_subcommand("run", "Solve every sweep cell and write metrics");
    add_common(run);
    auto* compare = app.add_subcommand("compare", "Compare against Crank-Nicolson at equal f budget");
    add_common(compare);
    auto* list = app.add_subcommand("list-problems", "Print the available problem ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (list->parsed()) {
        for (const auto& id : pnpde::problem_ids()) std::cout << id << '\n';
        return pnpde::kExitOk;
    }

    pnpde::RunOptions options;
    options.output_dir = out_dir;
    options.max_workers = max_workers;
    if (!cells.empty()) {
        try {
            options.cells = pnpde::parse_cells(cells);
        } catch (const pnpde::Error& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return pnpde::kExitConfig;
        }
    }
    return dispatch(compare->parsed() ? "compare" : "run", config_path, options, timings);
}
