#include "pnpde/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "pnpde/errors.hpp"
#include "pnpde/metrics.hpp"

namespace pnpde {

Grid Grid::uniform(double t0, double t1, std::size_t n, double x0, double x1, std::size_t m) {
    if (n == 0 || m == 0) throw InvalidArgument("grid sizes must be positive");
    Grid g;
    g.t.resize(n);
    g.x.resize(m);
    for (std::size_t i = 0; i < n; ++i) {
        g.t[i] = n == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    for (std::size_t j = 0; j < m; ++j) {
        g.x[j] = m == 1 ? x0 : x0 + (x1 - x0) * static_cast<double>(j) / static_cast<double>(m - 1);
    }
    if (n > 1) g.t.back() = t1;
    if (m > 1) {
        g.x.back() = x1;
        g.boundary = {0, m - 1};
    }
    return g;
}

Grid Grid::for_problem(const PDEProblem& problem, std::size_t n, std::size_t m) {
    return uniform(problem.t_start, problem.t_end, n, problem.x_left, problem.x_right, m);
}

bool Grid::is_boundary(std::size_t j) const {
    return std::find(boundary.begin(), boundary.end(), j) != boundary.end();
}

std::vector<std::size_t> Grid::interior() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!is_boundary(j)) out.push_back(j);
    }
    return out;
}

void Grid::validate() const {
    if (t.empty() || x.empty()) throw InvalidArgument("grid axes must be nonempty");
    for (std::size_t j = 1; j < x.size(); ++j) {
        if (!(x[j] > x[j - 1])) throw InvalidArgument("spatial nodes must be strictly increasing");
    }
    if (t.size() > 1) {
        const double delta = t[1] - t[0];
        if (!(delta > 0.0)) throw InvalidArgument("time nodes must be strictly increasing");
        for (std::size_t i = 2; i < t.size(); ++i) {
            if (std::abs((t[i] - t[i - 1]) - delta) > 1e-12 * std::max(delta, std::abs(t.back()))) {
                throw InvalidArgument("time nodes must be uniformly spaced");
            }
        }
    }
    for (auto b : boundary) {
        if (b >= x.size()) throw InvalidArgument("boundary index out of range");
    }
}

LinearisationStrategy LinearisationStrategy::of(StrategyKind kind) {
    if (kind == StrategyKind::custom) throw InvalidArgument("custom strategies need a builder");
    LinearisationStrategy s;
    s.kind = kind;
    return s;
}

LinearisationStrategy LinearisationStrategy::custom(Builder builder, DerivOrders max_orders, bool needs_dx,
                                                    bool needs_dxx) {
    if (!builder) throw InvalidArgument("custom strategy without a builder");
    LinearisationStrategy s;
    s.kind = StrategyKind::custom;
    s.builder = std::move(builder);
    s.max_orders = max_orders;
    s.needs_dx = needs_dx;
    s.needs_dxx = needs_dxx;
    return s;
}

DerivOrders LinearisationStrategy::emitted_orders() const {
    switch (kind) {
        case StrategyKind::lag_mean: return {0, 1};
        case StrategyKind::porous_q1: return {0, 2};
        case StrategyKind::porous_q2: return {0, 1};
        case StrategyKind::custom: return max_orders;
    }
    return {0, 0};
}

std::vector<OperatorTerms> linearise_step(const LinearisationStrategy& strategy, const NodeMeans& nodes, double t) {
    const std::size_t m = nodes.mean.size();
    std::vector<OperatorTerms> out(m);
    switch (strategy.kind) {
        case StrategyKind::lag_mean:
            for (std::size_t j = 0; j < m; ++j) out[j] = {{nodes.mean[j], {0, 1}}};
            return out;
        case StrategyKind::porous_q1:
            for (std::size_t j = 0; j < m; ++j) out[j] = {{nodes.mean[j], {0, 1}}, {nodes.mean[j], {0, 2}}};
            return out;
        case StrategyKind::porous_q2:
            if (nodes.dxx.size() != m) {
                throw InvalidArgument("porous_q2 linearisation needs second-derivative means at every node");
            }
            for (std::size_t j = 0; j < m; ++j) out[j] = {{nodes.mean[j], {0, 1}}, {nodes.dxx[j], {0, 0}}};
            return out;
        case StrategyKind::custom: {
            if (!strategy.builder) throw InvalidArgument("custom strategy without a builder");
            if (strategy.needs_dx && nodes.dx.size() != m) throw InvalidArgument("custom strategy needs dx means");
            if (strategy.needs_dxx && nodes.dxx.size() != m) throw InvalidArgument("custom strategy needs dxx means");
            out = strategy.builder(nodes, t);
            if (out.size() != m) throw InvalidArgument("custom strategy returned the wrong number of nodes");
            return out;
        }
    }
    return out;
}

TensorKernel default_prior(int beta_t, int beta_x, double rho_t, double rho_x) {
    return TensorKernel(MaternHalfInteger(beta_t, 1.0, rho_t), MaternHalfInteger(beta_x, 1.0, rho_x));
}

TensorKernel rational_quadratic_prior(double rho_t, double rho_x) {
    return TensorKernel(RationalQuadratic(1.0, rho_t), RationalQuadratic(1.0, rho_x));
}

namespace {

std::vector<LinearFunctional> level_functionals(const Grid& grid, double t, DerivOrders orders) {
    std::vector<LinearFunctional> out;
    out.reserve(grid.m());
    for (double x : grid.x) out.push_back(operator_at({DiffTerm{1.0, orders}}, {t, x}));
    return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void check_budget(const PDEProblem& problem, const TensorKernel& prior, const LinearisationStrategy& strategy) {
    DerivOrders need = strategy.emitted_orders();
    for (const auto& term : problem.p_terms) {
        need.t = std::max(need.t, term.orders.t);
        need.x = std::max(need.x, term.orders.x);
    }
    if (strategy.wants_dxx()) need.x = std::max(need.x, 2);
    // Differential rows are crossed with each other.
    prior.check_orders(need, need);
}

}  // namespace

SolveReport solve_pnm(const PDEProblem& problem, const Grid& grid, const TensorKernel& prior,
                      const LinearisationStrategy& strategy, const SolveOptions& options,
                      const PriorMean& prior_mean) {
    const auto started = std::chrono::steady_clock::now();
    grid.validate();
    check_budget(problem, prior, strategy);
    if (!(options.z_floor > 0.0)) throw InvalidArgument("z_floor must be positive");

    const std::size_t n = grid.n();
    const std::size_t m = grid.m();
    const auto interior = grid.interior();
    const bool conserve = options.conserve_mass && m >= 2;

    auto gp = std::make_shared<GaussianProcess>(prior, prior_mean, options.jitter);
    const std::size_t per_step = m + grid.boundary.size();
    const std::size_t conserve_rows = conserve && n > 1 ? n - 1 : 0;
    gp->reserve(static_cast<Eigen::Index>(interior.size() + n * per_step + conserve_rows));

    SolveReport report;
    report.grid = grid;

    // Initial data on interior nodes.
    std::vector<Observation> init;
    init.reserve(interior.size());
    for (auto j : interior) init.push_back({point_eval({grid.t[0], grid.x[j]}), problem.eval_g(grid.x[j])});
    gp->assimilate(init, 0, "initial data");

    LinearFunctional mass_functional;
    if (conserve) {
        // Quadrature mass of the discrete initial data.
        std::vector<double> level(m);
        for (std::size_t j = 0; j < m; ++j) {
            level[j] = grid.is_boundary(j) ? problem.h(grid.t[0], grid.x[j]) : problem.eval_g(grid.x[j]);
        }
        mass_functional = quadrature_functional(grid.x, grid.t[0]);
        report.initial_mass = apply(mass_functional, [&](DerivOrders, Point z) {
            const auto j = static_cast<std::size_t>(std::find(grid.x.begin(), grid.x.end(), z.x) - grid.x.begin());
            return level[j];
        });
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.t[i];
        NodeMeans nodes;
        nodes.mean = to_vector(gp->predict_means(level_functionals(grid, t, {0, 0})));
        if (strategy.wants_dx()) nodes.dx = to_vector(gp->predict_means(level_functionals(grid, t, {0, 1})));
        if (strategy.wants_dxx()) nodes.dxx = to_vector(gp->predict_means(level_functionals(grid, t, {0, 2})));
        const auto q = linearise_step(strategy, nodes, t);

        std::vector<Observation> batch;
        batch.reserve(per_step + 1);
        std::vector<OperatorTerms> step_ops;
        for (std::size_t j = 0; j < m; ++j) {
            OperatorTerms terms = problem.p_terms;
            for (const auto& term : q[j]) terms.push_back({problem.nonlinear_scale * term.coeff, term.orders});
            terms = combine_terms(terms);
            if (options.retain_operators) step_ops.push_back(terms);
            batch.push_back({operator_at(std::move(terms), {t, grid.x[j]}), problem.f(t, grid.x[j])});
        }
        for (auto b : grid.boundary) batch.push_back({point_eval({t, grid.x[b]}), problem.h(t, grid.x[b])});
        if (conserve && i > 0) batch.push_back({quadrature_functional(grid.x, t), report.initial_mass});

        gp->assimilate(batch, m, "step " + std::to_string(i) + " (t=" + std::to_string(t) + ")");
        if (options.retain_operators) report.operators.push_back(std::move(step_ops));
    }

    report.sigma_hat = gp->amplitude_mle(n, options.mle_normalisation);

    std::vector<LinearFunctional> nodes;
    nodes.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) nodes.push_back(point_eval({grid.t[i], grid.x[j]}));
    }
    const Eigen::VectorXd means = gp->predict_means(nodes);
    const Eigen::VectorXd vars = gp->predict_variances(nodes);
    report.mean.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    report.std_unit.resize(report.mean.rows(), report.mean.cols());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto k = static_cast<Eigen::Index>(i * m + j);
            report.mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = means(k);
            report.std_unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::sqrt(vars(k));
        }
    }
    report.std = report.sigma_hat * report.std_unit;

    if (m >= 2) {
        const auto weights = quadrature_functional(grid.x, grid.t[0]);
        report.mass.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                s += weights.atoms()[j].weight * report.mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
            report.mass[i] = s;
        }
    }

    if (problem.truth) {
        Eigen::MatrixXd truth(report.mean.rows(), report.mean.cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                truth(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = problem.truth(grid.t[i], grid.x[j]);
            }
        }
        const auto z = z_score(report.mean, report.std_unit, report.sigma_hat, truth, options.z_floor);
        report.metrics = FieldMetrics{sup_error(report.mean, truth), z.value, z.infinite, z.clipped, z.skipped};
        report.truth = std::move(truth);
    }

    report.cost = eval_counts(problem);
    report.jitter_events = gp->jitter_events();
    report.observation_count = static_cast<std::size_t>(gp->size());
    if (options.retain_posterior) report.posterior = gp;
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace pnpde
