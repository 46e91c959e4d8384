#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace pnpde {

/// max |a - b| over matching fields.
double sup_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct ZScore {
    double value = 0.0;
    bool infinite = false;     // sigma_hat (or every std) vanished under a nonzero error
    std::size_t clipped = 0;   // nodes whose denominator was raised to the floor
    std::size_t skipped = 0;   // zero-variance nodes with negligible error
};

/// max |mean - truth| / max(sigma_hat * std, floor * sigma_hat * max(std)).
/// std is the unit-amplitude posterior standard deviation.
ZScore z_score(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& std_unit, double sigma_hat,
               const Eigen::MatrixXd& truth, double floor);

struct MetricRow {
    std::size_t n = 0;
    std::size_t m = 0;
    double e_inf = 0.0;
    double z_score = 0.0;
    double sigma_hat = 0.0;
    double runtime_seconds = 0.0;
    std::uint64_t f_evals = 0;
    std::uint64_t g_evals = 0;
    std::uint64_t h_evals = 0;
    std::size_t jitter_events = 0;
};

enum class SweepAxis { n, m };

/// Least-squares slope of log(y) against log(x); needs >= 3 points.
double log_log_slope(std::span<const double> x, std::span<const double> y);

/// Slope of log e_inf against log(axis size), one fit per value of the other axis.
/// Groups with fewer than 3 rows are an error.
std::map<std::size_t, double> convergence_slopes(std::span<const MetricRow> rows, SweepAxis axis);

}  // namespace pnpde
