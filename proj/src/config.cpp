#include "pnpde/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pnpde/errors.hpp"

namespace pnpde {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Strips trailing "# ..." or "; ..." comments.
std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return trim(pos == std::string::npos ? s : s.substr(0, pos));
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (v == "sqrt3") return std::sqrt(3.0);
        const double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long d = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

std::vector<int> parse_exponents(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (const auto dots = item.find(".."); dots != std::string::npos) {
            const long lo = parse_long(key, trim(item.substr(0, dots)));
            const long hi = parse_long(key, trim(item.substr(dots + 2)));
            if (hi < lo) throw ConfigError(key + ": empty range '" + item + "'");
            for (long e = lo; e <= hi; ++e) out.push_back(static_cast<int>(e));
        } else {
            out.push_back(static_cast<int>(parse_long(key, item)));
        }
    }
    if (out.empty()) throw ConfigError(key + ": no exponents given");
    for (int e : out) {
        if (e < 2 || e > 7) throw ConfigError(key + ": exponent " + std::to_string(e) + " outside [2, 7]");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct DefaultScales {
    double rho_t;
    double rho_x;
};

DefaultScales default_scales(const std::string& problem, PriorKind kind) {
    if (kind == PriorKind::rational_quadratic) return {std::sqrt(3.0), std::sqrt(3.0)};
    if (problem == "burgers") return {6.0, 3.0};
    if (problem == "porous") return {1.0, 2.0};
    if (problem == "burgers_forced" || problem == "burgers_forced_zero") return {0.5, 0.5};
    return {1.0, 1.0};
}

}  // namespace

StrategyKind parse_strategy(const std::string& text) {
    if (text == "lag_mean") return StrategyKind::lag_mean;
    if (text == "porous_q1") return StrategyKind::porous_q1;
    if (text == "porous_q2") return StrategyKind::porous_q2;
    throw ConfigError("solver.strategy: unknown strategy '" + text + "'");
}

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::lag_mean: return "lag_mean";
        case StrategyKind::porous_q1: return "porous_q1";
        case StrategyKind::porous_q2: return "porous_q2";
        case StrategyKind::custom: return "custom";
    }
    return "unknown";
}

std::string to_string(PriorKind kind) {
    return kind == PriorKind::matern ? "matern" : "rational-quadratic";
}

std::string to_string(MleNormalisation kind) {
    return kind == MleNormalisation::per_step ? "per-step" : "per-observation";
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> known = {
        {"experiment", {"name", "problem", "output", "deterministic", "write_fields", "seeds"}},
        {"prior", {"kind", "beta_t", "beta_x", "rho_t", "rho_x"}},
        {"solver", {"strategy", "conserve_mass", "mle_normalisation", "z_floor"}},
        {"sweep", {"time_exponents", "space_exponents"}},
        {"reference", {"time_intervals", "space_intervals", "max_snapshots", "fraction"}},
    };

    ExperimentConfig cfg;
    for (const auto& [section, body] : tree) {
        const auto sec = known.find(section);
        if (sec == known.end()) throw ConfigError("unknown section [" + section + "]");
        if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
        for (const auto& [key, value] : body) {
            if (!sec->second.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            cfg.entries[section + "." + key] = strip_comment(value.data());
        }
    }

    auto get = [&](const std::string& k) -> const std::string* {
        const auto it = cfg.entries.find(k);
        return it == cfg.entries.end() ? nullptr : &it->second;
    };

    const auto* problem = get("experiment.problem");
    if (!problem || problem->empty()) throw ConfigError("experiment.problem is required");
    cfg.problem = *problem;
    const auto ids = problem_ids();
    if (std::find(ids.begin(), ids.end(), cfg.problem) == ids.end()) {
        throw ConfigError("experiment.problem: unknown problem '" + cfg.problem + "'");
    }
    cfg.name = get("experiment.name") ? *get("experiment.name") : cfg.problem;
    if (const auto* v = get("experiment.output")) cfg.output_dir = *v;
    if (const auto* v = get("experiment.deterministic")) cfg.deterministic = parse_bool("experiment.deterministic", *v);
    if (const auto* v = get("experiment.write_fields")) cfg.write_fields = parse_bool("experiment.write_fields", *v);
    if (const auto* v = get("experiment.seeds")) {
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) cfg.seeds.push_back(static_cast<std::uint64_t>(parse_long("experiment.seeds", item)));
        }
    }

    if (const auto* v = get("prior.kind")) {
        if (*v == "matern" || *v == "default-matern") {
            cfg.prior.kind = PriorKind::matern;
        } else if (*v == "rational-quadratic" || *v == "rational_quadratic") {
            cfg.prior.kind = PriorKind::rational_quadratic;
        } else {
            throw ConfigError("prior.kind: unknown prior '" + *v + "'");
        }
    }
    if (const auto* v = get("prior.beta_t")) cfg.prior.beta_t = static_cast<int>(parse_long("prior.beta_t", *v));
    if (const auto* v = get("prior.beta_x")) cfg.prior.beta_x = static_cast<int>(parse_long("prior.beta_x", *v));
    if (cfg.prior.beta_t < 0 || cfg.prior.beta_t > 3 || cfg.prior.beta_x < 0 || cfg.prior.beta_x > 3) {
        throw ConfigError("prior.beta_t / prior.beta_x must lie in 0..3");
    }
    const auto scales = default_scales(cfg.problem, cfg.prior.kind);
    cfg.prior.rho_t = get("prior.rho_t") ? parse_double("prior.rho_t", *get("prior.rho_t")) : scales.rho_t;
    cfg.prior.rho_x = get("prior.rho_x") ? parse_double("prior.rho_x", *get("prior.rho_x")) : scales.rho_x;
    if (!(cfg.prior.rho_t > 0.0) || !(cfg.prior.rho_x > 0.0)) throw ConfigError("length-scales must be positive");

    cfg.strategy = make_problem(cfg.problem).strategy_hint;
    if (const auto* v = get("solver.strategy")) cfg.strategy = parse_strategy(*v);
    if (const auto* v = get("solver.conserve_mass")) cfg.conserve_mass = parse_bool("solver.conserve_mass", *v);
    if (const auto* v = get("solver.mle_normalisation")) {
        if (*v == "per-step" || *v == "per_step") {
            cfg.mle_normalisation = MleNormalisation::per_step;
        } else if (*v == "per-observation" || *v == "per_observation") {
            cfg.mle_normalisation = MleNormalisation::per_observation;
        } else {
            throw ConfigError("solver.mle_normalisation: unknown value '" + *v + "'");
        }
    }
    if (const auto* v = get("solver.z_floor")) cfg.z_floor = parse_double("solver.z_floor", *v);
    if (!(cfg.z_floor > 0.0)) throw ConfigError("solver.z_floor must be positive");

    const auto* te = get("sweep.time_exponents");
    const auto* se = get("sweep.space_exponents");
    if (!te || !se) throw ConfigError("sweep.time_exponents and sweep.space_exponents are required");
    cfg.time_exponents = parse_exponents("sweep.time_exponents", *te);
    cfg.space_exponents = parse_exponents("sweep.space_exponents", *se);

    if (const auto* v = get("reference.time_intervals")) {
        cfg.reference.time_intervals = static_cast<std::size_t>(parse_long("reference.time_intervals", *v));
    }
    if (const auto* v = get("reference.space_intervals")) {
        cfg.reference.space_intervals = static_cast<std::size_t>(parse_long("reference.space_intervals", *v));
    }
    if (const auto* v = get("reference.max_snapshots")) {
        cfg.reference.max_snapshots = static_cast<std::size_t>(parse_long("reference.max_snapshots", *v));
    }
    if (const auto* v = get("reference.fraction")) cfg.reference_fraction = parse_double("reference.fraction", *v);
    if (cfg.reference.time_intervals < 1 || cfg.reference.space_intervals < 2) {
        throw ConfigError("reference resolution too small");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in);
}

}  // namespace pnpde
