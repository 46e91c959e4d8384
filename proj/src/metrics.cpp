#include "pnpde/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pnpde/errors.hpp"

namespace pnpde {

double sup_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidArgument("sup_error shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

ZScore z_score(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& std_unit, double sigma_hat,
               const Eigen::MatrixXd& truth, double floor) {
    if (mean.rows() != truth.rows() || mean.cols() != truth.cols() || mean.rows() != std_unit.rows() ||
        mean.cols() != std_unit.cols()) {
        throw InvalidArgument("z_score shape mismatch");
    }
    if (!(floor > 0.0)) throw InvalidArgument("z_score floor must be positive");
    if ((std_unit.array() < 0.0).any()) throw InvalidArgument("z_score needs a nonnegative std field");

    constexpr double negligible = 1e-12;
    ZScore out;
    const double max_std = std_unit.size() ? std_unit.maxCoeff() : 0.0;
    const double lower = floor * sigma_hat * max_std;
    for (Eigen::Index i = 0; i < mean.rows(); ++i) {
        for (Eigen::Index j = 0; j < mean.cols(); ++j) {
            const double err = std::abs(mean(i, j) - truth(i, j));
            const double sd = std_unit(i, j);
            if (sd == 0.0 && err < negligible) {
                ++out.skipped;
                continue;
            }
            double denom = sigma_hat * sd;
            if (denom < lower) {
                denom = lower;
                ++out.clipped;
            }
            if (denom <= 0.0) {
                if (err > 0.0) {
                    out.infinite = true;
                    out.value = std::numeric_limits<double>::infinity();
                }
                continue;
            }
            if (!out.infinite) out.value = std::max(out.value, err / denom);
        }
    }
    return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("log_log_slope size mismatch");
    if (x.size() < 3) throw InvalidArgument("convergence slope needs at least 3 rows, got " + std::to_string(x.size()));
    const auto k = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log_log_slope needs positive data");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = k * sxx - sx * sx;
    if (denom == 0.0) throw InvalidArgument("log_log_slope needs at least two distinct sizes");
    return (k * sxy - sx * sy) / denom;
}

std::map<std::size_t, double> convergence_slopes(std::span<const MetricRow> rows, SweepAxis axis) {
    std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : rows) {
        const std::size_t other = axis == SweepAxis::n ? r.m : r.n;
        const std::size_t size = axis == SweepAxis::n ? r.n : r.m;
        groups[other].first.push_back(static_cast<double>(size));
        groups[other].second.push_back(r.e_inf);
    }
    if (groups.empty()) throw InvalidArgument("convergence slope needs at least 3 rows, got 0");
    std::map<std::size_t, double> out;
    for (const auto& [other, xy] : groups) out[other] = log_log_slope(xy.first, xy.second);
    return out;
}

}  // namespace pnpde
