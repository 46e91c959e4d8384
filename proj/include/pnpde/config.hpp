#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pnpde/baselines.hpp"
#include "pnpde/gp.hpp"
#include "pnpde/problems.hpp"

namespace pnpde {

enum class PriorKind { matern, rational_quadratic };

struct PriorConfig {
    PriorKind kind = PriorKind::matern;
    int beta_t = 1;
    int beta_x = 2;
    double rho_t = 1.0;
    double rho_x = 1.0;
};

/// One experiment file: problem, prior, solver switches and the (i, j) sweep
/// over grids n = 2^i + 1, m = 2^j + 1.
struct ExperimentConfig {
    std::string name;
    std::string problem;
    PriorConfig prior;
    StrategyKind strategy = StrategyKind::lag_mean;
    bool conserve_mass = false;
    MleNormalisation mle_normalisation = MleNormalisation::per_step;
    double z_floor = 1e-6;
    std::vector<int> time_exponents;
    std::vector<int> space_exponents;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    bool write_fields = true;
    /// Writes runtime_s as 0 in metrics.csv so repeated runs give byte-identical
    /// tables; measured runtimes still go to report.json.
    bool deterministic = true;
    ReferenceSpec reference;
    double reference_fraction = 0.1;
    /// Every key = value pair as read, keyed "section.key".
    std::map<std::string, std::string> entries;
};

/// Parses the INI-style format:
///
///   [experiment]  name, problem, output, deterministic, write_fields, seeds
///   [prior]       kind = matern | rational-quadratic, beta_t, beta_x, rho_t, rho_x
///   [solver]      strategy = lag_mean | porous_q1 | porous_q2, conserve_mass,
///                 mle_normalisation = per-step | per-observation, z_floor
///   [sweep]       time_exponents, space_exponents  (lists "2,3,4" or ranges "2..7")
///   [reference]   time_intervals, space_intervals, max_snapshots, fraction
///
/// Missing length-scales default to the problem's published values.
/// Throws ConfigError on any malformed or out-of-range entry.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

StrategyKind parse_strategy(const std::string& text);
std::string to_string(StrategyKind kind);
std::string to_string(PriorKind kind);
std::string to_string(MleNormalisation kind);

}  // namespace pnpde
