#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pnpde/config.hpp"
#include "pnpde/metrics.hpp"
#include "pnpde/solver.hpp"

namespace pnpde {

/// Process exit codes of the experiment runner.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitReference = 4,
};

/// Sweep cell (i, j): grid n = 2^i + 1 by m = 2^j + 1.
struct Cell {
    int i = 0;
    int j = 0;
    [[nodiscard]] std::size_t n() const { return (std::size_t{1} << i) + 1; }
    [[nodiscard]] std::size_t m() const { return (std::size_t{1} << j) + 1; }
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct RunOptions {
    std::filesystem::path output_dir;  // empty: config, then $PNPDE_OUT_DIR
    std::size_t max_workers = 1;
    std::optional<std::vector<Cell>> cells;  // subset of the sweep
};

/// Parses "i:j[,i:j...]". Throws ConfigError on malformed input.
std::vector<Cell> parse_cells(const std::string& text);

/// Cells of the sweep, optionally restricted; sorted by (i, j).
std::vector<Cell> sweep_cells(const ExperimentConfig& config, const std::optional<std::vector<Cell>>& subset);

/// Output directory precedence: explicit option, then PNPDE_OUT_DIR, then the config.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options);

TensorKernel make_prior(const PriorConfig& prior);
SolveOptions make_solve_options(const ExperimentConfig& config);

/// Fixed metrics.csv schema.
std::string metrics_csv_header();
std::string metrics_csv_line(const MetricRow& row, bool deterministic);

/// Runs `f(k)` for k in [0, count) on at most max_workers threads.
void parallel_for(std::size_t count, std::size_t max_workers, const std::function<void(std::size_t)>& f);

/// `run` subcommand: solve each cell, write metrics.csv, report.json and fields/*.csv.
int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// `compare` subcommand: PNM versus Crank-Nicolson on the same grids; writes compare.csv and report.json.
int compare_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

}  // namespace pnpde
