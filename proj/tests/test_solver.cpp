#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pnpde/errors.hpp"
#include "pnpde/metrics.hpp"
#include "pnpde/solver.hpp"
#include "support/oracles.hpp"

using namespace pnpde;

namespace {

struct Setup {
    PDEProblem problem;
    TensorKernel prior;
};

Setup benchmark(const std::string& id) {
    if (id == "burgers") return {burgers_homogeneous(), default_prior(1, 2, 6, 3)};
    if (id == "porous") return {porous_medium(), default_prior(1, 2, 1, 2)};
    return {burgers_forced(), default_prior(1, 2, 0.5, 0.5)};
}

}  // namespace

TEST_CASE("uniform grids") {
    const auto g = Grid::uniform(0.0, 1.0, 5, -1.0, 1.0, 3);
    CHECK(g.n() == 5);
    CHECK(g.m() == 3);
    CHECK(g.t.back() == 1.0);
    CHECK(g.x.front() == -1.0);
    CHECK(g.x.back() == 1.0);
    CHECK(g.boundary == std::vector<std::size_t>{0, 2});
    CHECK(g.interior() == std::vector<std::size_t>{1});
    CHECK(g.is_boundary(2));
    CHECK_NOTHROW(g.validate());

    Grid bad = g;
    bad.t[2] += 0.01;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = g;
    bad.x[1] = 5.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_THROWS_AS(Grid::uniform(0.0, 1.0, 0, 0.0, 1.0, 3), InvalidArgument);
}

TEST_CASE("linearisation strategies") {
    NodeMeans nodes;
    nodes.mean = {0.0, 2.0, 0.0};
    nodes.dxx = {0.0, -0.5, 0.0};

    const auto lag = linearise_step(LinearisationStrategy::of(StrategyKind::lag_mean), nodes, 0.0);
    REQUIRE(lag.size() == 3);
    CHECK(lag[1] == OperatorTerms{{2.0, {0, 1}}});

    const auto q1 = linearise_step(LinearisationStrategy::of(StrategyKind::porous_q1), nodes, 0.0);
    CHECK(q1[1] == OperatorTerms{{2.0, {0, 1}}, {2.0, {0, 2}}});

    const auto q2 = linearise_step(LinearisationStrategy::of(StrategyKind::porous_q2), nodes, 0.0);
    CHECK(q2[1] == OperatorTerms{{2.0, {0, 1}}, {-0.5, {0, 0}}});

    NodeMeans zero;
    zero.mean = {0.0, 0.0};
    for (const auto& terms : linearise_step(LinearisationStrategy::of(StrategyKind::lag_mean), zero, 0.0)) {
        for (const auto& term : terms) CHECK(term.coeff == 0.0);
    }

    NodeMeans no_dxx;
    no_dxx.mean = {1.0};
    CHECK_THROWS_AS(linearise_step(LinearisationStrategy::of(StrategyKind::porous_q2), no_dxx, 0.0), InvalidArgument);
    CHECK_THROWS_AS(LinearisationStrategy::of(StrategyKind::custom), InvalidArgument);
}

TEST_CASE("prior constructors") {
    const auto k = default_prior(1, 2, 6, 3);
    const auto& t = std::get<MaternHalfInteger>(k.time_factor());
    const auto& x = std::get<MaternHalfInteger>(k.space_factor());
    CHECK(t.p() == 1);
    CHECK(t.rho() == 6.0);
    CHECK(x.p() == 2);
    CHECK(x.rho() == 3.0);
    CHECK(t.sigma() == 1.0);
    const auto rq = rational_quadratic_prior(std::sqrt(3.0), std::sqrt(3.0));
    CHECK(std::holds_alternative<RationalQuadratic>(rq.time_factor()));
    CHECK(std::get<RationalQuadratic>(rq.space_factor()).rho() == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("zero heat problem gives a zero field") {
    auto p = make_problem("heat_zero");
    const auto grid = Grid::for_problem(p, 5, 7);
    const auto r = solve_pnm(p, grid, default_prior(1, 2, 1, 1), LinearisationStrategy::of(StrategyKind::lag_mean));
    CHECK(r.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.sigma_hat == 0.0);
    REQUIRE(r.metrics.has_value());
    CHECK(r.metrics->e_inf == 0.0);
    CHECK(r.metrics->z == 0.0);
}

TEST_CASE("evaluation budget") {
    auto p = burgers_homogeneous();
    const auto grid = Grid::for_problem(p, 5, 5);
    const auto r = solve_pnm(p, grid, default_prior(1, 2, 6, 3), LinearisationStrategy::of(StrategyKind::lag_mean));
    CHECK(r.cost == EvalCounts{25, 3, 10});

    auto q = porous_medium();
    SolveOptions opts;
    opts.conserve_mass = true;
    const auto g2 = Grid::for_problem(q, 9, 17);
    const auto r2 = solve_pnm(q, g2, default_prior(1, 2, 1, 2), LinearisationStrategy::of(StrategyKind::porous_q2), opts);
    CHECK(r2.cost == EvalCounts{9 * 17, 15, 18});
    CHECK(r2.observation_count == 15 + 9 * (17 + 2) + 8);
}

TEST_CASE("sequential solve equals batch conditioning on the benchmarks") {
    for (const std::string id : {"burgers", "porous", "burgers_forced"}) {
        CAPTURE(id);
        auto s = benchmark(id);
        const auto grid = Grid::for_problem(s.problem, 3, 5);
        SolveOptions opts;
        opts.retain_posterior = true;
        const auto strategy = LinearisationStrategy::of(s.problem.strategy_hint);
        const auto r = solve_pnm(s.problem, grid, s.prior, strategy, opts);
        REQUIRE(r.posterior);
        CHECK(r.jitter_events.empty());

        std::vector<LinearFunctional> nodes;
        for (double t : grid.t)
            for (double x : grid.x) nodes.push_back(point_eval({t, x}));
        const auto batch = oracle::batch_condition(s.prior, r.posterior->observations(), nodes);
        const auto seq = r.posterior->predict(nodes);
        const double scale = std::max(1.0, batch.covariance.cwiseAbs().maxCoeff());
        CHECK((seq.mean - batch.mean).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((seq.covariance - batch.covariance).cwiseAbs().maxCoeff() < 1e-7 * scale);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(nodes.size()); ++k) {
            CHECK(std::abs(r.mean(k / 5, k % 5) - batch.mean(k)) < 1e-8);
        }
    }
}

TEST_CASE("mass constraint holds at every time level") {
    auto p = porous_medium();
    const auto grid = Grid::for_problem(p, 9, 17);
    SolveOptions opts;
    opts.conserve_mass = true;
    const auto r = solve_pnm(p, grid, default_prior(1, 2, 1, 2), LinearisationStrategy::of(StrategyKind::porous_q1), opts);
    REQUIRE(r.mass.size() == 9);
    CHECK(r.initial_mass == doctest::Approx(8.0 / std::sqrt(3.0)).epsilon(0.05));
    for (double mass : r.mass) CHECK(std::abs(mass - r.initial_mass) < 1e-8 * r.initial_mass);
}

TEST_CASE("linear problems ignore the linearisation") {
    auto a = heat_equation(0.5, [](double x) { return std::sin(std::numbers::pi * x); }, 0.0, 1.0, 0.5);
    auto b = heat_equation(0.5, [](double x) { return std::sin(std::numbers::pi * x); }, 0.0, 1.0, 0.5);
    const auto grid = Grid::for_problem(a, 5, 9);
    SolveOptions opts;
    opts.retain_operators = true;
    const auto none = LinearisationStrategy::custom(
        [](const NodeMeans& nodes, double) { return std::vector<OperatorTerms>(nodes.mean.size()); }, {0, 0}, false,
        false);
    const auto ra = solve_pnm(a, grid, default_prior(1, 2, 1, 1), LinearisationStrategy::of(StrategyKind::lag_mean), opts);
    const auto rb = solve_pnm(b, grid, default_prior(1, 2, 1, 1), none, opts);
    CHECK(ra.operators == rb.operators);
    CHECK(ra.mean == rb.mean);
}

TEST_CASE("posterior mean does not depend on the prior amplitude") {
    auto p1 = burgers_homogeneous();
    auto p2 = burgers_homogeneous();
    const auto grid = Grid::for_problem(p1, 5, 9);
    const auto unit = default_prior(1, 2, 6, 3);
    const TensorKernel big(MaternHalfInteger(1, 3.0, 6), MaternHalfInteger(2, 1.0, 3));
    const auto lag = LinearisationStrategy::of(StrategyKind::lag_mean);
    const auto a = solve_pnm(p1, grid, unit, lag);
    const auto b = solve_pnm(p2, grid, big, lag);
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(b.sigma_hat == doctest::Approx(a.sigma_hat / 3.0).epsilon(1e-6));
}

TEST_CASE("insufficiently smooth priors are rejected before any evaluation") {
    auto p = burgers_homogeneous();
    const auto grid = Grid::for_problem(p, 5, 5);
    CHECK_THROWS_AS(solve_pnm(p, grid, default_prior(1, 0, 1, 1), LinearisationStrategy::of(StrategyKind::lag_mean)),
                    InsufficientSmoothness);
    CHECK(eval_counts(p) == EvalCounts{0, 0, 0});
    CHECK_THROWS_AS(solve_pnm(p, grid, default_prior(0, 2, 1, 1), LinearisationStrategy::of(StrategyKind::lag_mean)),
                    InsufficientSmoothness);
}

TEST_CASE("burgers accuracy improves with the time grid") {
    double previous = 1e9;
    for (std::size_t n : {5u, 9u, 17u}) {
        auto p = burgers_homogeneous();
        const auto r = solve_pnm(p, Grid::for_problem(p, n, 17), default_prior(1, 2, 6, 3),
                                 LinearisationStrategy::of(StrategyKind::lag_mean));
        REQUIRE(r.metrics.has_value());
        CHECK(r.metrics->e_inf < previous);
        CHECK(std::isfinite(r.metrics->z));
        previous = r.metrics->e_inf;
    }
}
