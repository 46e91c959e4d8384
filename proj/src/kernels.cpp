#include "pnpde/kernels.hpp"

#include <cmath>
#include <sstream>

#include "pnpde/errors.hpp"

namespace pnpde {
namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be positive and finite");
    }
}

double horner(const std::vector<double>& c, double h) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * h + *it;
    return acc;
}

}  // namespace

std::vector<double> matern_coeffs(int p, double sigma, double rho) {
    if (p < 0 || p > 3) {
        throw UnsupportedSmoothness("Matern index p = " + std::to_string(p) + " is not supported (p in 0..3)");
    }
    require_positive(sigma, "sigma");
    require_positive(rho, "rho");
    std::vector<double> a(p + 1);
    const double lead = sigma * sigma * factorial(p) / factorial(2 * p);
    for (int k = 0; k <= p; ++k) {
        a[k] = lead * factorial(2 * p - k) / (factorial(p - k) * factorial(k)) * std::pow(2.0 / rho, k);
    }
    return a;
}

MaternHalfInteger::MaternHalfInteger(int p, double sigma, double rho)
    : p_(p), sigma_(sigma), rho_(rho) {
    poly_.reserve(2 * p + 1);
    poly_.push_back(matern_coeffs(p, sigma, rho));
    for (int q = 0; q < 2 * p; ++q) {
        const auto& prev = poly_.back();
        std::vector<double> next(prev.size(), 0.0);
        for (std::size_t k = 0; k < prev.size(); ++k) {
            next[k] -= prev[k] / rho_;
            if (k > 0) next[k - 1] += static_cast<double>(k) * prev[k];
        }
        poly_.push_back(std::move(next));
    }
}

double MaternHalfInteger::derivative(int order, double h) const {
    if (order < 0) throw InvalidArgument("derivative order must be nonnegative");
    if (order > max_order()) {
        throw InsufficientSmoothness("Matern nu = " + std::to_string(p_) + ".5 has no derivative of order " +
                                     std::to_string(order));
    }
    const bool odd = (order % 2) != 0;
    if (h == 0.0) return odd ? 0.0 : poly_[order][0];
    const double a = std::abs(h);
    const double v = std::exp(-a / rho_) * horner(poly_[order], a);
    return (h < 0.0 && odd) ? -v : v;
}

void MaternHalfInteger::derivatives(double h, int order, std::span<double> out) const {
    if (order < 0) throw InvalidArgument("derivative order must be nonnegative");
    if (order > max_order()) {
        throw InsufficientSmoothness("Matern nu = " + std::to_string(p_) + ".5 has no derivative of order " +
                                     std::to_string(order));
    }
    if (h == 0.0) {
        for (int q = 0; q <= order; ++q) out[q] = (q % 2) ? 0.0 : poly_[q][0];
        return;
    }
    const double a = std::abs(h);
    const double e = std::exp(-a / rho_);
    for (int q = 0; q <= order; ++q) {
        const double v = e * horner(poly_[q], a);
        out[q] = (h < 0.0 && (q % 2)) ? -v : v;
    }
}

RationalQuadratic::RationalQuadratic(double sigma, double rho) : sigma_(sigma), rho_(rho) {
    require_positive(sigma, "sigma");
    require_positive(rho, "rho");
}

double RationalQuadratic::derivative(int order, double h) const {
    std::array<double, 5> d{};
    derivatives(h, order, d);
    return d[order];
}

void RationalQuadratic::derivatives(double h, int order, std::span<double> out) const {
    if (order < 0) throw InvalidArgument("derivative order must be nonnegative");
    if (order > max_order()) {
        throw InsufficientSmoothness("rational quadratic derivatives are implemented up to order 4, requested " +
                                     std::to_string(order));
    }
    const double s = h / rho_;
    const double s2 = s * s;
    const double iq = 1.0 / (1.0 + s2);
    const double ir = 1.0 / rho_;
    // d^k/ds^k (1 + s^2)^{-1}, scaled by rho^{-k} for the chain rule.
    double w = sigma_ * iq;
    out[0] = w;
    if (order >= 1) out[1] = (w *= iq * ir) * (-2.0 * s);
    if (order >= 2) out[2] = (w *= iq * ir) * (6.0 * s2 - 2.0);
    if (order >= 3) out[3] = (w *= iq * ir) * (24.0 * s * (1.0 - s2));
    if (order >= 4) out[4] = (w *= iq * ir) * (24.0 * (5.0 * s2 * s2 - 10.0 * s2 + 1.0));
}

int max_order(const UnivariateKernel& k) {
    return std::visit([](const auto& kk) { return kk.max_order(); }, k);
}

double univariate_deriv(const UnivariateKernel& k, int order, double h) {
    return std::visit([&](const auto& kk) { return kk.derivative(order, h); }, k);
}

std::string describe(const UnivariateKernel& k) {
    std::ostringstream os;
    if (const auto* m = std::get_if<MaternHalfInteger>(&k)) {
        os << "matern(nu=" << m->p() << ".5, sigma=" << m->sigma() << ", rho=" << m->rho() << ")";
    } else {
        const auto& r = std::get<RationalQuadratic>(k);
        os << "rational_quadratic(sigma=" << r.sigma() << ", rho=" << r.rho() << ")";
    }
    return os.str();
}

TensorKernel::TensorKernel(UnivariateKernel time, UnivariateKernel space)
    : time_(std::move(time)),
      space_(std::move(space)),
      time_max_(pnpde::max_order(time_)),
      space_max_(pnpde::max_order(space_)) {}

void TensorKernel::check_orders(DerivOrders left, DerivOrders right) const {
    if (left.t < 0 || left.x < 0 || right.t < 0 || right.x < 0) {
        throw InvalidArgument("derivative orders must be nonnegative");
    }
    if (left.t + right.t > time_max_) {
        throw InsufficientSmoothness("time factor " + describe(time_) + " cannot supply combined order " +
                                     std::to_string(left.t + right.t));
    }
    if (left.x + right.x > space_max_) {
        throw InsufficientSmoothness("space factor " + describe(space_) + " cannot supply combined order " +
                                     std::to_string(left.x + right.x));
    }
}

void TensorKernel::fill_table(Point r, Point s, int time_order, int space_order, Table& table) const {
    std::visit([&](const auto& k) { k.derivatives(r.t - s.t, time_order, table.time); }, time_);
    std::visit([&](const auto& k) { k.derivatives(r.x - s.x, space_order, table.space); }, space_);
}

double TensorKernel::cross_cov(DerivOrders left, DerivOrders right, Point r, Point s) const {
    check_orders(left, right);
    const double kt = univariate_deriv(time_, left.t + right.t, r.t - s.t);
    const double kx = univariate_deriv(space_, left.x + right.x, r.x - s.x);
    const double sign = ((right.t + right.x) % 2) ? -1.0 : 1.0;
    return sign * kt * kx;
}

double tensor_cross_cov(const TensorKernel& kernel, DerivOrders left, DerivOrders right, Point r, Point s) {
    return kernel.cross_cov(left, right, r, s);
}

}  // namespace pnpde
