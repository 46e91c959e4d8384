#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pnpde {

/// Largest derivative order the tensor kernel evaluates per argument pair.
inline constexpr int kMaxKernelOrder = 6;

/// Polynomial coefficients a_0..a_p of the half-integer Matérn kernel
/// K(h) = exp(-|h|/rho) * sum_k a_k |h|^k, with nu = p + 1/2.
/// Throws UnsupportedSmoothness for p > 3.
std::vector<double> matern_coeffs(int p, double sigma, double rho);

/// Half-integer Matérn covariance on the real line.
///
/// For h > 0 every derivative has the form exp(-h/rho) * P_q(h) with P_q a
/// polynomial of degree <= p; the polynomials are built once by the product
/// rule P_{q+1} = P_q' - P_q / rho. Negative h uses K^(q)(-h) = (-1)^q K^(q)(h).
/// At h = 0 odd orders are exactly zero and even orders take the analytic limit.
class MaternHalfInteger {
public:
    MaternHalfInteger(int p, double sigma, double rho);

    [[nodiscard]] int p() const { return p_; }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] double rho() const { return rho_; }
    /// Highest order for which the derivative exists everywhere (2p).
    [[nodiscard]] int max_order() const { return 2 * p_; }

    [[nodiscard]] double value(double h) const { return derivative(0, h); }
    [[nodiscard]] double derivative(int order, double h) const;

    /// Writes K^(0)(h) .. K^(max_order)(h) into out with a single exponential.
    void derivatives(double h, int max_order, std::span<double> out) const;

    [[nodiscard]] MaternHalfInteger with_sigma(double sigma) const { return {p_, sigma, rho_}; }

private:
    int p_;
    double sigma_;
    double rho_;
    // poly_[q][k]: coefficient of h^k in P_q, q = 0..2p.
    std::vector<std::vector<double>> poly_;
};

/// Rational-quadratic covariance C(h) = sigma * (1 + h^2/rho^2)^(-1).
/// The prefactor is sigma, not sigma^2; the amplitude estimate absorbs the difference.
class RationalQuadratic {
public:
    RationalQuadratic(double sigma, double rho);

    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] double rho() const { return rho_; }
    [[nodiscard]] int max_order() const { return 4; }

    [[nodiscard]] double value(double h) const { return derivative(0, h); }
    [[nodiscard]] double derivative(int order, double h) const;
    void derivatives(double h, int max_order, std::span<double> out) const;

    [[nodiscard]] RationalQuadratic with_sigma(double sigma) const { return {sigma, rho_}; }

private:
    double sigma_;
    double rho_;
};

using UnivariateKernel = std::variant<MaternHalfInteger, RationalQuadratic>;

[[nodiscard]] int max_order(const UnivariateKernel& k);
[[nodiscard]] double univariate_deriv(const UnivariateKernel& k, int order, double h);
[[nodiscard]] std::string describe(const UnivariateKernel& k);

/// Derivative orders (time, space) applied to one argument of the covariance.
struct DerivOrders {
    int t = 0;
    int x = 0;
    friend bool operator==(const DerivOrders&, const DerivOrders&) = default;
};

/// Space-time point z = (t, x).
struct Point {
    double t = 0.0;
    double x = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Product covariance Sigma((t,x),(t',x')) = K_t(t - t') * K_x(x - x').
class TensorKernel {
public:
    TensorKernel(UnivariateKernel time, UnivariateKernel space);

    [[nodiscard]] const UnivariateKernel& time_factor() const { return time_; }
    [[nodiscard]] const UnivariateKernel& space_factor() const { return space_; }
    [[nodiscard]] int max_time_order() const { return time_max_; }
    [[nodiscard]] int max_space_order() const { return space_max_; }

    /// d_t^{a_t} d_x^{a_x} d_t'^{c_t} d_x'^{c_x} Sigma(r, s).
    [[nodiscard]] double cross_cov(DerivOrders left, DerivOrders right, Point r, Point s) const;

    /// Factor derivative tables at a displacement, for callers that contract
    /// many order pairs at the same anchors.
    struct Table {
        std::array<double, kMaxKernelOrder + 1> time{};
        std::array<double, kMaxKernelOrder + 1> space{};
    };
    void fill_table(Point r, Point s, int time_order, int space_order, Table& table) const;

    /// Throws InsufficientSmoothness unless the combined orders are supported.
    void check_orders(DerivOrders left, DerivOrders right) const;

private:
    UnivariateKernel time_;
    UnivariateKernel space_;
    int time_max_;
    int space_max_;
};

[[nodiscard]] double tensor_cross_cov(const TensorKernel& kernel, DerivOrders left, DerivOrders right,
                                      Point r, Point s);

}  // namespace pnpde
