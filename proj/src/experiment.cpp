#include "pnpde/experiment.hpp"

#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pnpde/errors.hpp"

namespace pnpde {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json number(double v) {
    if (std::isfinite(v)) return v;
    return fmt(v);
}

json config_echo(const ExperimentConfig& config) {
    json j = json::object();
    for (const auto& [k, v] : config.entries) j[k] = v;
    j["resolved"] = {
        {"problem", config.problem},
        {"prior", {{"kind", to_string(config.prior.kind)},
                   {"beta_t", config.prior.beta_t},
                   {"beta_x", config.prior.beta_x},
                   {"rho_t", config.prior.rho_t},
                   {"rho_x", config.prior.rho_x}}},
        {"strategy", to_string(config.strategy)},
        {"conserve_mass", config.conserve_mass},
        {"mle_normalisation", to_string(config.mle_normalisation)},
        {"z_floor", config.z_floor},
        {"time_exponents", config.time_exponents},
        {"space_exponents", config.space_exponents},
        {"seeds", config.seeds},
    };
    return j;
}

json versions() {
    return {{"pnpde", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}};
}

json jitter_json(const std::vector<JitterEvent>& events) {
    json arr = json::array();
    for (const auto& e : events) arr.push_back({{"label", e.label}, {"jitter", e.jitter}, {"relative", e.relative}});
    return arr;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("failed to write " + path.string());
}

void write_fields(const fs::path& dir, const SolveReport& report, const std::function<double(double, double)>& truth) {
    fs::create_directories(dir);
    std::ostringstream os;
    os << "t,x,mean,std,truth\n";
    for (std::size_t i = 0; i < report.grid.n(); ++i) {
        for (std::size_t j = 0; j < report.grid.m(); ++j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            os << fmt(report.grid.t[i]) << ',' << fmt(report.grid.x[j]) << ',' << fmt(report.mean(ii, jj)) << ','
               << fmt(report.std(ii, jj)) << ',' << (truth ? fmt(truth(report.grid.t[i], report.grid.x[j])) : "")
               << '\n';
        }
    }
    write_text(dir / ("n" + std::to_string(report.grid.n()) + "_m" + std::to_string(report.grid.m()) + ".csv"), os.str());
}

Eigen::MatrixXd sample(const Grid& grid, const std::function<double(double, double)>& fn) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.n()), static_cast<Eigen::Index>(grid.m()));
    for (std::size_t i = 0; i < grid.n(); ++i) {
        for (std::size_t j = 0; j < grid.m(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fn(grid.t[i], grid.x[j]);
        }
    }
    return out;
}

struct CellOutcome {
    Cell cell;
    bool ok = false;
    std::string error;
    MetricRow row;
    FieldMetrics metrics;
    std::optional<SolveReport> report;
    double max_mass_drift = 0.0;
    // compare only
    double e_inf_cn = 0.0;
    std::uint64_t f_evals_cn = 0;
};

// Truth for problems without a closed form comes from a converged reference.
struct TruthSource {
    std::function<double(double, double)> fn;
    std::optional<Reference> reference;
};

TruthSource make_truth(const ExperimentConfig& config, std::ostream& log) {
    auto problem = make_problem(config.problem);
    TruthSource src;
    if (problem.truth) {
        src.fn = problem.truth;
        return src;
    }
    log << "computing reference solution (" << config.reference.time_intervals << " x "
        << config.reference.space_intervals << " intervals, plus 2x refinement)\n";
    src.reference = reference_solution(problem, config.reference);
    const GridInterpolant interp = src.reference->truth;
    src.fn = [interp](double t, double x) { return interp(t, x); };
    return src;
}

CellOutcome solve_cell(const ExperimentConfig& config, const Cell& cell, const TruthSource& truth, bool with_cn) {
    CellOutcome out;
    out.cell = cell;
    try {
        auto problem = make_problem(config.problem);
        const Grid grid = Grid::for_problem(problem, cell.n(), cell.m());
        SolveReport report = solve_pnm(problem, grid, make_prior(config.prior),
                                       LinearisationStrategy::of(config.strategy), make_solve_options(config));
        const Eigen::MatrixXd truth_field = sample(grid, truth.fn);
        const auto z = z_score(report.mean, report.std_unit, report.sigma_hat, truth_field, config.z_floor);
        out.metrics = FieldMetrics{sup_error(report.mean, truth_field), z.value, z.infinite, z.clipped, z.skipped};
        report.metrics = out.metrics;
        report.truth = truth_field;

        out.row.n = grid.n();
        out.row.m = grid.m();
        out.row.e_inf = out.metrics.e_inf;
        out.row.z_score = out.metrics.z;
        out.row.sigma_hat = report.sigma_hat;
        out.row.runtime_seconds = report.runtime_seconds;
        out.row.f_evals = report.cost.f;
        out.row.g_evals = report.cost.g;
        out.row.h_evals = report.cost.h;
        out.row.jitter_events = report.jitter_events.size();
        if (config.conserve_mass && !report.mass.empty()) {
            for (double mass : report.mass) out.max_mass_drift = std::max(out.max_mass_drift, std::abs(mass - report.initial_mass));
        }

        if (with_cn) {
            auto cn_problem = make_problem(config.problem);
            const FDField cn = crank_nicolson(cn_problem, grid);
            out.e_inf_cn = sup_error(cn.values, truth_field);
            out.f_evals_cn = eval_counts(cn_problem).f;
        }
        out.report = std::move(report);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

json cell_json(const CellOutcome& c) {
    json j = {{"i", c.cell.i}, {"j", c.cell.j}, {"n", c.cell.n()}, {"m", c.cell.m()}};
    if (!c.ok) {
        j["status"] = "solver_failure";
        j["error"] = c.error;
        return j;
    }
    j["status"] = "ok";
    j["e_inf"] = number(c.row.e_inf);
    j["z"] = number(c.row.z_score);
    j["z_infinite"] = c.metrics.z_infinite;
    j["z_clipped_nodes"] = c.metrics.z_clipped;
    j["z_skipped_nodes"] = c.metrics.z_skipped;
    j["sigma_hat"] = number(c.row.sigma_hat);
    j["runtime_s"] = c.row.runtime_seconds;
    j["evals"] = {{"f", c.row.f_evals}, {"g", c.row.g_evals}, {"h", c.row.h_evals}};
    j["observations"] = c.report->observation_count;
    j["jitter_events"] = jitter_json(c.report->jitter_events);
    j["max_mass_drift"] = c.max_mass_drift;
    return j;
}

std::vector<CellOutcome> solve_all(const ExperimentConfig& config, const std::vector<Cell>& cells,
                                   const TruthSource& truth, bool with_cn, std::size_t workers, std::ostream& log) {
    std::vector<CellOutcome> outcomes(cells.size());
    std::mutex log_mutex;
    parallel_for(cells.size(), workers, [&](std::size_t k) {
        outcomes[k] = solve_cell(config, cells[k], truth, with_cn);
        std::lock_guard lock(log_mutex);
        const auto& o = outcomes[k];
        log << "cell n=" << o.cell.n() << " m=" << o.cell.m() << ": ";
        if (o.ok) {
            log << "e_inf=" << fmt(o.row.e_inf) << " z=" << fmt(o.row.z_score) << " sigma_hat=" << fmt(o.row.sigma_hat);
            if (with_cn) log << " e_inf_cn=" << fmt(o.e_inf_cn);
            log << '\n';
        } else {
            log << "FAILED: " << o.error << '\n';
        }
    });
    return outcomes;
}

json reference_json(const TruthSource& truth, double smallest, double fraction, bool converged) {
    if (!truth.reference) return nullptr;
    return {{"estimated_error", truth.reference->estimated_error},
            {"time_intervals", truth.reference->time_intervals},
            {"space_intervals", truth.reference->space_intervals},
            {"smallest_e_inf", number(smallest)},
            {"fraction", fraction},
            {"converged", converged}};
}

}  // namespace

std::vector<Cell> parse_cells(const std::string& text) {
    std::vector<Cell> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("--cells: expected i:j, got '" + item + "'");
        try {
            std::size_t a = 0, b = 0;
            const std::string si = item.substr(0, colon), sj = item.substr(colon + 1);
            Cell c{std::stoi(si, &a), std::stoi(sj, &b)};
            if (a != si.size() || b != sj.size()) throw std::invalid_argument(item);
            out.push_back(c);
        } catch (const std::exception&) {
            throw ConfigError("--cells: expected i:j, got '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--cells: no cells given");
    return out;
}

std::vector<Cell> sweep_cells(const ExperimentConfig& config, const std::optional<std::vector<Cell>>& subset) {
    std::vector<Cell> all;
    for (int i : config.time_exponents) {
        for (int j : config.space_exponents) all.push_back({i, j});
    }
    if (!subset) return all;
    std::vector<Cell> out;
    for (const auto& c : all) {
        if (std::find(subset->begin(), subset->end(), c) != subset->end()) out.push_back(c);
    }
    for (const auto& c : *subset) {
        if (std::find(all.begin(), all.end(), c) == all.end()) {
            throw ConfigError("--cells: " + std::to_string(c.i) + ":" + std::to_string(c.j) + " is not in the sweep");
        }
    }
    return out;
}

fs::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options) {
    if (!options.output_dir.empty()) return options.output_dir;
    if (const char* env = std::getenv("PNPDE_OUT_DIR"); env && *env) return env;
    if (!config.output_dir.empty()) return config.output_dir;
    return fs::path("out") / config.name;
}

TensorKernel make_prior(const PriorConfig& prior) {
    if (prior.kind == PriorKind::rational_quadratic) return rational_quadratic_prior(prior.rho_t, prior.rho_x);
    return default_prior(prior.beta_t, prior.beta_x, prior.rho_t, prior.rho_x);
}

SolveOptions make_solve_options(const ExperimentConfig& config) {
    SolveOptions o;
    o.conserve_mass = config.conserve_mass;
    o.mle_normalisation = config.mle_normalisation;
    o.z_floor = config.z_floor;
    return o;
}

std::string metrics_csv_header() {
    return "n,m,e_inf,z,sigma_hat,runtime_s,f_evals,g_evals,h_evals,jitter_events";
}

std::string metrics_csv_line(const MetricRow& r, bool deterministic) {
    std::ostringstream os;
    os << r.n << ',' << r.m << ',' << fmt(r.e_inf) << ',' << fmt(r.z_score) << ',' << fmt(r.sigma_hat) << ','
       << (deterministic ? std::string("0") : fmt(r.runtime_seconds)) << ',' << r.f_evals << ',' << r.g_evals << ','
       << r.h_evals << ',' << r.jitter_events;
    return os.str();
}

void parallel_for(std::size_t count, std::size_t max_workers, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(max_workers, count));
    if (workers == 1) {
        for (std::size_t k = 0; k < count; ++k) f(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) f(k);
        });
    }
    for (auto& t : pool) t.join();
}

int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
    const auto cells = sweep_cells(config, options.cells);
    const fs::path dir = resolve_output_dir(config, options);
    fs::create_directories(dir);

    json report = {{"command", "run"}, {"name", config.name}, {"problem", config.problem},
                   {"config", config_echo(config)}, {"versions", versions()}};
    TruthSource truth;
    try {
        truth = make_truth(config, log);
    } catch (const std::exception& e) {
        report["status"] = "solver_failure";
        report["error"] = e.what();
        write_text(dir / "report.json", report.dump(2) + "\n");
        log << "reference solve failed: " << e.what() << '\n';
        return kExitSolver;
    }

    const auto outcomes = solve_all(config, cells, truth, false, options.max_workers, log);

    std::ostringstream csv;
    csv << metrics_csv_header() << '\n';
    json cell_reports = json::array();
    bool failed = false;
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes) {
        cell_reports.push_back(cell_json(o));
        if (!o.ok) {
            failed = true;
            continue;
        }
        csv << metrics_csv_line(o.row, config.deterministic) << '\n';
        smallest = std::min(smallest, o.row.e_inf);
        if (config.write_fields) write_fields(dir / "fields", *o.report, truth.fn);
    }
    write_text(dir / "metrics.csv", csv.str());
    report["cells"] = cell_reports;

    int code = failed ? kExitSolver : kExitOk;
    bool converged = true;
    if (truth.reference && std::isfinite(smallest)) {
        converged = truth.reference->estimated_error < config.reference_fraction * smallest;
        if (!converged && code == kExitOk) code = kExitReference;
    }
    report["reference"] = reference_json(truth, smallest, config.reference_fraction, converged);
    report["status"] = code == kExitOk ? "ok" : code == kExitSolver ? "solver_failure" : "reference_not_converged";
    write_text(dir / "report.json", report.dump(2) + "\n");
    log << "wrote " << (dir / "metrics.csv").string() << '\n';
    return code;
}

int compare_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
    if (config.problem != "burgers_forced" && config.problem != "burgers_forced_zero") {
        throw ConfigError("compare requires the burgers_forced problem, got '" + config.problem + "'");
    }
    const auto cells = sweep_cells(config, options.cells);
    const fs::path dir = resolve_output_dir(config, options);
    fs::create_directories(dir);

    json report = {{"command", "compare"}, {"name", config.name}, {"problem", config.problem},
                   {"config", config_echo(config)}, {"versions", versions()}};
    TruthSource truth;
    try {
        truth = make_truth(config, log);
    } catch (const std::exception& e) {
        report["status"] = "solver_failure";
        report["error"] = e.what();
        write_text(dir / "report.json", report.dump(2) + "\n");
        return kExitSolver;
    }

    const auto outcomes = solve_all(config, cells, truth, true, options.max_workers, log);

    std::ostringstream cmp, csv;
    cmp << "n,m,e_inf_pnm,e_inf_cn,f_evals_pnm,f_evals_cn\n";
    csv << metrics_csv_header() << '\n';
    json rows = json::array();
    bool failed = false;
    bool parity = true;
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes) {
        json j = cell_json(o);
        if (!o.ok) {
            failed = true;
            rows.push_back(j);
            continue;
        }
        const bool same = o.row.f_evals == o.f_evals_cn;
        parity = parity && same;
        j["e_inf_cn"] = number(o.e_inf_cn);
        j["f_evals_cn"] = o.f_evals_cn;
        j["budget_parity"] = same;
        rows.push_back(j);
        cmp << o.row.n << ',' << o.row.m << ',' << fmt(o.row.e_inf) << ',' << fmt(o.e_inf_cn) << ',' << o.row.f_evals
            << ',' << o.f_evals_cn << '\n';
        csv << metrics_csv_line(o.row, config.deterministic) << '\n';
        smallest = std::min(smallest, o.row.e_inf);
        if (config.write_fields) write_fields(dir / "fields", *o.report, truth.fn);
    }
    write_text(dir / "compare.csv", cmp.str());
    write_text(dir / "metrics.csv", csv.str());
    report["cells"] = rows;
    report["budget_parity"] = parity;

    int code = failed || !parity ? kExitSolver : kExitOk;
    bool converged = true;
    if (truth.reference && std::isfinite(smallest)) {
        converged = truth.reference->estimated_error < config.reference_fraction * smallest;
        if (!converged && code == kExitOk) code = kExitReference;
    }
    report["reference"] = reference_json(truth, smallest, config.reference_fraction, converged);
    report["status"] = code == kExitOk ? "ok" : code == kExitSolver ? "solver_failure" : "reference_not_converged";
    write_text(dir / "report.json", report.dump(2) + "\n");
    log << "wrote " << (dir / "compare.csv").string() << '\n';
    return code;
}

}  // namespace pnpde
