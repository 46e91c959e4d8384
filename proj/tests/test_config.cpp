#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pnpde/config.hpp"
#include "pnpde/errors.hpp"

using namespace pnpde;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

const char* kMinimal = R"(
[experiment]
problem = burgers
[sweep]
time_exponents = 2
space_exponents = 2
)";

}  // namespace

TEST_CASE("defaults follow the problem") {
    const auto c = parse(kMinimal);
    CHECK(c.problem == "burgers");
    CHECK(c.prior.kind == PriorKind::matern);
    CHECK(c.prior.beta_t == 1);
    CHECK(c.prior.beta_x == 2);
    CHECK(c.prior.rho_t == 6.0);
    CHECK(c.prior.rho_x == 3.0);
    CHECK(c.strategy == StrategyKind::lag_mean);
    CHECK(c.mle_normalisation == MleNormalisation::per_step);
    CHECK(c.z_floor == 1e-6);
    CHECK(c.deterministic);
    CHECK(c.time_exponents == std::vector<int>{2});

    const auto porous = parse(R"(
[experiment]
problem = porous
[sweep]
time_exponents = 2..4
space_exponents = 2, 6
)");
    CHECK(porous.prior.rho_t == 1.0);
    CHECK(porous.prior.rho_x == 2.0);
    CHECK(porous.strategy == StrategyKind::porous_q1);
    CHECK(porous.time_exponents == std::vector<int>{2, 3, 4});
    CHECK(porous.space_exponents == std::vector<int>{2, 6});

    const auto forced = parse(R"(
[experiment]
problem = burgers_forced
[sweep]
time_exponents = 3
space_exponents = 4
)");
    CHECK(forced.prior.rho_t == 0.5);
    CHECK(forced.prior.rho_x == 0.5);
}

TEST_CASE("full configuration") {
    const auto c = parse(R"(
# comment
[experiment]
name = rq
problem = burgers
output = out/rq      ; trailing comment
seeds = 1, 2
deterministic = false
write_fields = no

[prior]
kind = rational-quadratic
rho_t = sqrt3
rho_x = 1.5

[solver]
strategy = lag_mean
conserve_mass = true
mle_normalisation = per-observation
z_floor = 1e-4

[sweep]
time_exponents = 3..5
space_exponents = 5

[reference]
time_intervals = 512
space_intervals = 128
fraction = 0.05
)");
    CHECK(c.name == "rq");
    CHECK(c.output_dir == "out/rq");
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK_FALSE(c.deterministic);
    CHECK_FALSE(c.write_fields);
    CHECK(c.prior.kind == PriorKind::rational_quadratic);
    CHECK(c.prior.rho_t == doctest::Approx(std::sqrt(3.0)));
    CHECK(c.prior.rho_x == 1.5);
    CHECK(c.conserve_mass);
    CHECK(c.mle_normalisation == MleNormalisation::per_observation);
    CHECK(c.z_floor == 1e-4);
    CHECK(c.reference.time_intervals == 512);
    CHECK(c.reference.space_intervals == 128);
    CHECK(c.reference_fraction == 0.05);
    CHECK(c.entries.at("prior.rho_t") == "sqrt3");
}

TEST_CASE("rational quadratic defaults to sqrt(3) length-scales") {
    const auto c = parse(std::string(kMinimal) + "[prior]\nkind = rational-quadratic\n");
    CHECK(c.prior.rho_t == doctest::Approx(std::sqrt(3.0)));
    CHECK(c.prior.rho_x == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("malformed configurations are rejected") {
    const std::string sweep = "[sweep]\ntime_exponents = 2\nspace_exponents = 2\n";
    const std::vector<std::string> bad{
        "[experiment]\nproblem = nope\n" + sweep,
        "[experiment]\n" + sweep,
        "[experiment]\nproblem = burgers\n[sweep]\ntime_exponents = 1\nspace_exponents = 2\n",
        "[experiment]\nproblem = burgers\n[sweep]\ntime_exponents = 2..8\nspace_exponents = 2\n",
        "[experiment]\nproblem = burgers\n[sweep]\ntime_exponents = 5..3\nspace_exponents = 2\n",
        "[experiment]\nproblem = burgers\n[sweep]\ntime_exponents = 2\n",
        "[experiment]\nproblem = burgers\ncolour = blue\n" + sweep,
        "[bogus]\nx = 1\n[experiment]\nproblem = burgers\n" + sweep,
        "[experiment]\nproblem = burgers\n[prior]\nrho_t = -1\n" + sweep,
        "[experiment]\nproblem = burgers\n[prior]\nrho_x = abc\n" + sweep,
        "[experiment]\nproblem = burgers\n[prior]\nbeta_t = 4\n" + sweep,
        "[experiment]\nproblem = burgers\n[prior]\nkind = gaussian\n" + sweep,
        "[experiment]\nproblem = burgers\n[solver]\nstrategy = magic\n" + sweep,
        "[experiment]\nproblem = burgers\n[solver]\nconserve_mass = maybe\n" + sweep,
        "[experiment]\nproblem = burgers\n[solver]\nz_floor = 0\n" + sweep,
        "[experiment]\nproblem = burgers\n[solver]\nmle_normalisation = sometimes\n" + sweep,
        "[experiment\nproblem = burgers\n" + sweep,
        "stray = 1\n[experiment]\nproblem = burgers\n" + sweep,
    };
    for (const auto& text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse(text), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("names round-trip") {
    for (auto k : {StrategyKind::lag_mean, StrategyKind::porous_q1, StrategyKind::porous_q2}) {
        CHECK(parse_strategy(to_string(k)) == k);
    }
    CHECK(to_string(PriorKind::rational_quadratic) == "rational-quadratic");
    CHECK(to_string(MleNormalisation::per_observation) == "per-observation");
}
