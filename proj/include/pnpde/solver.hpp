#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pnpde/gp.hpp"
#include "pnpde/problems.hpp"

namespace pnpde {

/// Tensor grid t_0 < ... < t_{n-1} (uniform) by x_1 < ... < x_m.
struct Grid {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<std::size_t> boundary;  // indices into x lying on the spatial boundary

    /// n x m uniform grid with both spatial endpoints flagged as boundary.
    static Grid uniform(double t0, double t1, std::size_t n, double x0, double x1, std::size_t m);
    /// Uniform grid spanning a problem's domain.
    static Grid for_problem(const PDEProblem& problem, std::size_t n, std::size_t m);

    [[nodiscard]] std::size_t n() const { return t.size(); }
    [[nodiscard]] std::size_t m() const { return x.size(); }
    [[nodiscard]] bool is_boundary(std::size_t j) const;
    [[nodiscard]] std::vector<std::size_t> interior() const;
    /// Throws InvalidArgument on empty axes, non-increasing nodes or non-uniform time steps.
    void validate() const;
};

/// Posterior-mean information at the spatial nodes of one time level.
struct NodeMeans {
    std::vector<double> mean;
    std::vector<double> dx;   // empty unless requested
    std::vector<double> dxx;  // empty unless requested
};

/// Builds the nonlinear part Q_i at every node from pre-step information.
struct LinearisationStrategy {
    using Builder = std::function<std::vector<OperatorTerms>(const NodeMeans&, double t)>;

    StrategyKind kind = StrategyKind::lag_mean;
    Builder builder;         // used by custom only
    bool needs_dx = false;   // custom only
    bool needs_dxx = false;  // custom only
    DerivOrders max_orders{0, 1};  // highest orders the strategy emits (custom only)

    static LinearisationStrategy of(StrategyKind kind);
    static LinearisationStrategy custom(Builder builder, DerivOrders max_orders, bool needs_dx, bool needs_dxx);

    [[nodiscard]] bool wants_dx() const { return kind == StrategyKind::custom && needs_dx; }
    [[nodiscard]] bool wants_dxx() const { return kind == StrategyKind::porous_q2 || (kind == StrategyKind::custom && needs_dxx); }
    [[nodiscard]] DerivOrders emitted_orders() const;
};

/// Q_i per node:
///   lag_mean  : mean_j d_x
///   porous_q1 : mean_j d_x + mean_j d_x^2
///   porous_q2 : mean_j d_x + dxx_j * identity
///   custom    : the builder's output
std::vector<OperatorTerms> linearise_step(const LinearisationStrategy& strategy, const NodeMeans& nodes, double t);

/// Matérn tensor prior with p_t = beta_t, p_x = beta_x (nu = beta + 1/2) at unit amplitude.
TensorKernel default_prior(int beta_t, int beta_x, double rho_t, double rho_x);
/// Rational-quadratic tensor prior at unit amplitude.
TensorKernel rational_quadratic_prior(double rho_t, double rho_x);

struct SolveOptions {
    bool conserve_mass = false;
    MleNormalisation mle_normalisation = MleNormalisation::per_step;
    JitterPolicy jitter{};
    double z_floor = 1e-6;
    /// Keep the final GaussianProcess in the report.
    bool retain_posterior = false;
    /// Keep the per-step operator lists in the report.
    bool retain_operators = false;
};

struct FieldMetrics {
    double e_inf = 0.0;
    double z = 0.0;
    bool z_infinite = false;
    std::size_t z_clipped = 0;
    std::size_t z_skipped = 0;
};

struct SolveReport {
    Grid grid;
    Eigen::MatrixXd mean;      // n x m posterior mean
    Eigen::MatrixXd std_unit;  // n x m posterior std at unit amplitude
    Eigen::MatrixXd std;       // sigma_hat * std_unit
    std::optional<Eigen::MatrixXd> truth;
    double sigma_hat = 0.0;
    EvalCounts cost;
    std::vector<JitterEvent> jitter_events;
    std::optional<FieldMetrics> metrics;
    double initial_mass = 0.0;
    std::vector<double> mass;  // trapezoidal mass of the mean at each t_i
    std::size_t observation_count = 0;
    double runtime_seconds = 0.0;
    std::shared_ptr<const GaussianProcess> posterior;
    std::vector<std::vector<OperatorTerms>> operators;  // [step][node], when retained
};

/// Sequential probabilistic solve: initial data, then per step boundary,
/// linearised differential and optional mass constraints; sigma_hat from the
/// differential data; mean/std on the grid.
SolveReport solve_pnm(const PDEProblem& problem, const Grid& grid, const TensorKernel& prior,
                      const LinearisationStrategy& strategy, const SolveOptions& options = {},
                      const PriorMean& prior_mean = zero_mean());

}  // namespace pnpde
