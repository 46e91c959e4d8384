#pragma once

#include <span>
#include <vector>

#include "pnpde/kernels.hpp"

namespace pnpde {

/// One term coeff * d_t^{a_t} d_x^{a_x} of a linear differential operator.
struct DiffTerm {
    double coeff = 1.0;
    DerivOrders orders{};
    friend bool operator==(const DiffTerm&, const DiffTerm&) = default;
};

/// Terms of a linear operator with coefficients frozen at one anchor.
using OperatorTerms = std::vector<DiffTerm>;

/// Sums coefficients of terms with equal orders and drops exact zeros, keeping first-seen order.
OperatorTerms combine_terms(std::span<const DiffTerm> terms);

/// A weighted sum of differential operators applied at anchor points:
///   u -> sum_atoms weight * sum_terms coeff * d^orders u(anchor).
class LinearFunctional {
public:
    struct Atom {
        Point anchor;
        OperatorTerms terms;
        double weight = 1.0;
    };

    LinearFunctional() = default;
    explicit LinearFunctional(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

    [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
    [[nodiscard]] bool empty() const { return atoms_.empty(); }

    /// Highest total time/space order over all terms.
    [[nodiscard]] DerivOrders max_orders() const;

    /// Copy with every weight multiplied by factor.
    [[nodiscard]] LinearFunctional scaled(double factor) const;

    /// Concatenation; represents the sum of the two functionals.
    [[nodiscard]] LinearFunctional plus(const LinearFunctional& other) const;

private:
    std::vector<Atom> atoms_;
};

/// u -> u(z).
LinearFunctional point_eval(Point z);

/// u -> sum coeff * d^orders u(z).
LinearFunctional operator_at(OperatorTerms terms, Point z);

/// Trapezoidal rule u -> sum_j w_j u(t, x_j) over strictly increasing nodes.
LinearFunctional quadrature_functional(std::span<const double> x_nodes, double t_anchor);

/// Bilinear form lambda x lambda' applied to the kernel.
/// Throws InsufficientSmoothness when an order pair exceeds the kernel budget.
double functional_cross_cov(const TensorKernel& kernel, const LinearFunctional& left,
                            const LinearFunctional& right);

/// Applies a functional to a field given by its derivative oracle field(orders, point).
template <typename Field>
double apply(const LinearFunctional& functional, Field&& field) {
    double acc = 0.0;
    for (const auto& atom : functional.atoms()) {
        double s = 0.0;
        for (const auto& term : atom.terms) s += term.coeff * field(term.orders, atom.anchor);
        acc += atom.weight * s;
    }
    return acc;
}

}  // namespace pnpde
