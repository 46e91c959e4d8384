#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "pnpde/problems.hpp"
#include "pnpde/solver.hpp"

namespace pnpde {

/// Finite-difference solution values[i][j] ~ u(t_i, x_j).
struct FDField {
    Grid grid;
    Eigen::MatrixXd values;
};

struct CrankNicolsonOptions {
    /// Store every k-th time level only (the final level is always kept). 1 keeps all.
    std::size_t snapshot_stride = 1;
};

/// Crank-Nicolson for u_t + a u u_x - alpha u_xx = f with the advective
/// coefficient u lagged to the previous level, theta = 1/2 averaging of the
/// diffusion, advection derivative and forcing, and Dirichlet rows pinned to h.
/// f is read on every grid node of every level through the counted callable.
/// Throws InvalidArgument for problems without a Burgers form and SingularSystem
/// (naming the step) on a vanishing pivot.
FDField crank_nicolson(const PDEProblem& problem, const Grid& grid, const CrankNicolsonOptions& options = {});

/// Solves the tridiagonal system (lower, diag, upper) x = rhs in place of rhs.
/// lower[0] and upper[n-1] are ignored. Returns false on a vanishing pivot.
bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs);

/// Bilinear interpolant of a stored finite-difference field.
class GridInterpolant {
public:
    GridInterpolant() = default;
    GridInterpolant(std::vector<double> t, std::vector<double> x, Eigen::MatrixXd values);
    double operator()(double t, double x) const;

    [[nodiscard]] const std::vector<double>& t_nodes() const { return t_; }
    [[nodiscard]] const std::vector<double>& x_nodes() const { return x_; }

private:
    std::vector<double> t_;
    std::vector<double> x_;
    Eigen::MatrixXd values_;
};

struct ReferenceSpec {
    std::size_t time_intervals = 1024;
    std::size_t space_intervals = 256;
    /// Upper bound on stored time levels per solve.
    std::size_t max_snapshots = 4097;
};

struct Reference {
    GridInterpolant truth;
    /// sup |u_fine - u_coarse| over the coarse solve's stored nodes; a
    /// conservative estimate of the fine solution's error.
    double estimated_error = 0.0;
    std::size_t time_intervals = 0;
    std::size_t space_intervals = 0;
};

/// High-resolution Crank-Nicolson reference. Solves at spec resolution and at
/// twice it in both directions, keeps the finer one and reports their sup difference.
Reference reference_solution(const PDEProblem& problem, const ReferenceSpec& spec);

/// Throws ReferenceNotConverged unless estimated_error < fraction * smallest_error.
void require_converged(const Reference& reference, double smallest_error, double fraction = 0.1);

}  // namespace pnpde
