#include "pnpde/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pnpde/errors.hpp"

namespace pnpde {

bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return true;
    std::vector<double> c(n);
    double beta = diag[0];
    if (!(std::abs(beta) > 1e-300) || !std::isfinite(beta)) return false;
    rhs[0] /= beta;
    for (std::size_t j = 1; j < n; ++j) {
        c[j] = upper[j - 1] / beta;
        beta = diag[j] - lower[j] * c[j];
        if (!(std::abs(beta) > 1e-300) || !std::isfinite(beta)) return false;
        rhs[j] = (rhs[j] - lower[j] * rhs[j - 1]) / beta;
    }
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= c[j + 1] * rhs[j + 1];
    return true;
}

FDField crank_nicolson(const PDEProblem& problem, const Grid& grid, const CrankNicolsonOptions& options) {
    if (!problem.burgers_form) {
        throw InvalidArgument("Crank-Nicolson supports u_t + a u u_x - alpha u_xx = f problems only; '" + problem.id +
                              "' has no such form");
    }
    grid.validate();
    const std::size_t n = grid.n();
    const std::size_t m = grid.m();
    if (m < 3) throw InvalidArgument("Crank-Nicolson needs at least 3 spatial nodes");
    const double dx = grid.x[1] - grid.x[0];
    for (std::size_t j = 2; j < m; ++j) {
        if (std::abs((grid.x[j] - grid.x[j - 1]) - dx) > 1e-10 * dx) {
            throw InvalidArgument("Crank-Nicolson needs a uniform spatial grid");
        }
    }
    const double alpha = problem.burgers_form->diffusion;
    const double adv = problem.burgers_form->advection;
    const std::size_t stride = std::max<std::size_t>(1, options.snapshot_stride);

    std::vector<double> u(m), f_now(m), f_next(m), lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t j = 0; j < m; ++j) {
        u[j] = grid.is_boundary(j) ? problem.h(grid.t[0], grid.x[j]) : problem.eval_g(grid.x[j]);
    }
    for (std::size_t j = 0; j < m; ++j) f_now[j] = problem.f(grid.t[0], grid.x[j]);

    std::vector<double> stored_t{grid.t[0]};
    std::vector<std::vector<double>> stored{u};
    const double inv_dx2 = 1.0 / (dx * dx);
    const double inv_2dx = 0.5 / dx;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t_next = grid.t[i + 1];
        const double half_dt = 0.5 * (t_next - grid.t[i]);
        for (std::size_t j = 0; j < m; ++j) f_next[j] = problem.f(t_next, grid.x[j]);

        for (std::size_t j = 0; j < m; ++j) {
            if (grid.is_boundary(j)) {
                lower[j] = upper[j] = 0.0;
                diag[j] = 1.0;
                rhs[j] = problem.h(t_next, grid.x[j]);
                continue;
            }
            const double c = adv * u[j];
            const double lo = -c * inv_2dx - alpha * inv_dx2;  // coefficient of u_{j-1} in L u
            const double di = 2.0 * alpha * inv_dx2;
            const double up = c * inv_2dx - alpha * inv_dx2;
            lower[j] = half_dt * lo;
            diag[j] = 1.0 + half_dt * di;
            upper[j] = half_dt * up;
            const double lu = lo * u[j - 1] + di * u[j] + up * u[j + 1];
            rhs[j] = u[j] - half_dt * lu + half_dt * (f_now[j] + f_next[j]);
        }
        if (!solve_tridiagonal(lower, diag, upper, rhs)) {
            throw SingularSystem("singular tridiagonal system at Crank-Nicolson step " + std::to_string(i));
        }
        u.swap(rhs);
        f_now.swap(f_next);
        if ((i + 1) % stride == 0 || i + 2 == n) {
            stored_t.push_back(t_next);
            stored.push_back(u);
        }
    }

    FDField out;
    out.grid = grid;
    out.grid.t = stored_t;
    out.values.resize(static_cast<Eigen::Index>(stored.size()), static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < stored.size(); ++k) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = stored[k][j];
            if (!std::isfinite(v)) {
                throw SingularSystem("non-finite Crank-Nicolson value at stored level " + std::to_string(k));
            }
            out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return out;
}

GridInterpolant::GridInterpolant(std::vector<double> t, std::vector<double> x, Eigen::MatrixXd values)
    : t_(std::move(t)), x_(std::move(x)), values_(std::move(values)) {
    if (t_.empty() || x_.empty() || values_.rows() != static_cast<Eigen::Index>(t_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(x_.size())) {
        throw InvalidArgument("interpolant dimensions do not match its nodes");
    }
}

namespace {

// Index k and weight w with v ~ (1 - w) nodes[k] + w nodes[k + 1]; clamps outside the range.
std::pair<std::size_t, double> bracket(const std::vector<double>& nodes, double v) {
    if (nodes.size() == 1 || v <= nodes.front()) return {0, 0.0};
    if (v >= nodes.back()) return {nodes.size() - 2, 1.0};
    auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    const auto k = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return {k, (v - nodes[k]) / (nodes[k + 1] - nodes[k])};
}

}  // namespace

double GridInterpolant::operator()(double t, double x) const {
    const auto [i, wt] = bracket(t_, t);
    const auto [j, wx] = bracket(x_, x);
    auto at = [&](std::size_t a, std::size_t b) {
        a = std::min(a, t_.size() - 1);
        b = std::min(b, x_.size() - 1);
        return values_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    };
    const double lo = (1.0 - wx) * at(i, j) + (wx > 0.0 ? wx * at(i, j + 1) : 0.0);
    if (wt == 0.0) return lo;
    const double hi = (1.0 - wx) * at(i + 1, j) + (wx > 0.0 ? wx * at(i + 1, j + 1) : 0.0);
    return (1.0 - wt) * lo + wt * hi;
}

Reference reference_solution(const PDEProblem& problem, const ReferenceSpec& spec) {
    if (spec.time_intervals == 0 || spec.space_intervals < 2) throw InvalidArgument("reference resolution too small");
    const std::size_t snapshots = std::max<std::size_t>(2, spec.max_snapshots);
    const std::size_t coarse_stride = (spec.time_intervals + snapshots - 2) / (snapshots - 1);

    const Grid coarse_grid = Grid::for_problem(problem, spec.time_intervals + 1, spec.space_intervals + 1);
    const Grid fine_grid = Grid::for_problem(problem, 2 * spec.time_intervals + 1, 2 * spec.space_intervals + 1);
    const FDField coarse = crank_nicolson(problem, coarse_grid, {coarse_stride});
    const FDField fine = crank_nicolson(problem, fine_grid, {2 * coarse_stride});

    double diff = 0.0;
    const auto levels = std::min(coarse.values.rows(), fine.values.rows());
    for (Eigen::Index k = 0; k < levels; ++k) {
        for (Eigen::Index j = 0; j < coarse.values.cols(); ++j) {
            diff = std::max(diff, std::abs(coarse.values(k, j) - fine.values(k, 2 * j)));
        }
    }

    Reference out;
    out.truth = GridInterpolant(fine.grid.t, fine.grid.x, fine.values);
    out.estimated_error = diff;
    out.time_intervals = 2 * spec.time_intervals;
    out.space_intervals = 2 * spec.space_intervals;
    return out;
}

void require_converged(const Reference& reference, double smallest_error, double fraction) {
    if (!(reference.estimated_error < fraction * smallest_error)) {
        std::ostringstream os;
        os << "reference not converged: estimated error " << reference.estimated_error << " is not below " << fraction
           << " x smallest measured error " << smallest_error;
        throw ReferenceNotConverged(os.str());
    }
}

}  // namespace pnpde
