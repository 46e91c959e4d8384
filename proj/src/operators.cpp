#include "pnpde/operators.hpp"

#include <algorithm>
#include <string>

#include "pnpde/errors.hpp"

namespace pnpde {

OperatorTerms combine_terms(std::span<const DiffTerm> terms) {
    OperatorTerms out;
    for (const auto& term : terms) {
        auto it = std::find_if(out.begin(), out.end(), [&](const DiffTerm& d) { return d.orders == term.orders; });
        if (it == out.end()) {
            out.push_back(term);
        } else {
            it->coeff += term.coeff;
        }
    }
    std::erase_if(out, [](const DiffTerm& d) { return d.coeff == 0.0; });
    return out;
}

DerivOrders LinearFunctional::max_orders() const {
    DerivOrders m{};
    for (const auto& atom : atoms_) {
        for (const auto& term : atom.terms) {
            m.t = std::max(m.t, term.orders.t);
            m.x = std::max(m.x, term.orders.x);
        }
    }
    return m;
}

LinearFunctional LinearFunctional::scaled(double factor) const {
    auto atoms = atoms_;
    for (auto& atom : atoms) atom.weight *= factor;
    return LinearFunctional(std::move(atoms));
}

LinearFunctional LinearFunctional::plus(const LinearFunctional& other) const {
    auto atoms = atoms_;
    atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
    return LinearFunctional(std::move(atoms));
}

LinearFunctional point_eval(Point z) {
    return LinearFunctional({{z, {DiffTerm{1.0, {0, 0}}}, 1.0}});
}

LinearFunctional operator_at(OperatorTerms terms, Point z) {
    for (const auto& term : terms) {
        if (term.orders.t < 0 || term.orders.x < 0) throw InvalidArgument("negative derivative order");
    }
    return LinearFunctional({{z, std::move(terms), 1.0}});
}

LinearFunctional quadrature_functional(std::span<const double> x_nodes, double t_anchor) {
    const std::size_t m = x_nodes.size();
    if (m < 2) throw InvalidArgument("quadrature needs at least 2 nodes, got " + std::to_string(m));
    for (std::size_t j = 1; j < m; ++j) {
        if (!(x_nodes[j] > x_nodes[j - 1])) throw InvalidArgument("quadrature nodes must be strictly increasing");
    }
    std::vector<LinearFunctional::Atom> atoms;
    atoms.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double left = j > 0 ? x_nodes[j] - x_nodes[j - 1] : 0.0;
        const double right = j + 1 < m ? x_nodes[j + 1] - x_nodes[j] : 0.0;
        atoms.push_back({{t_anchor, x_nodes[j]}, {DiffTerm{1.0, {0, 0}}}, 0.5 * (left + right)});
    }
    return LinearFunctional(std::move(atoms));
}

double functional_cross_cov(const TensorKernel& kernel, const LinearFunctional& left,
                            const LinearFunctional& right) {
    const DerivOrders lo = left.max_orders();
    const DerivOrders ro = right.max_orders();
    kernel.check_orders(lo, ro);
    const int to = lo.t + ro.t;
    const int xo = lo.x + ro.x;

    TensorKernel::Table table;
    double acc = 0.0;
    for (const auto& a : left.atoms()) {
        for (const auto& b : right.atoms()) {
            kernel.fill_table(a.anchor, b.anchor, to, xo, table);
            double s = 0.0;
            for (const auto& ta : a.terms) {
                for (const auto& tb : b.terms) {
                    const double sign = ((tb.orders.t + tb.orders.x) % 2) ? -1.0 : 1.0;
                    s += sign * ta.coeff * tb.coeff * table.time[ta.orders.t + tb.orders.t] *
                         table.space[ta.orders.x + tb.orders.x];
                }
            }
            acc += a.weight * b.weight * s;
        }
    }
    return acc;
}

}  // namespace pnpde
