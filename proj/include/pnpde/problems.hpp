#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnpde/operators.hpp"

namespace pnpde {

/// A black-box field v(t, x) memoised by exact node key, counting distinct evaluations.
/// Move-only: every instance owns its counter.
class CountedFunction {
public:
    using Fn = std::function<double(double, double)>;

    CountedFunction();
    CountedFunction(std::string name, Fn fn);
    CountedFunction(CountedFunction&&) noexcept = default;
    CountedFunction& operator=(CountedFunction&&) noexcept = default;

    /// Evaluates (or recalls) v(t, x). Throws NonFiniteEvaluation on NaN/inf.
    double operator()(double t, double x) const;

    [[nodiscard]] std::uint64_t count() const;
    void reset() const;
    [[nodiscard]] const std::string& name() const { return name_; }

private:
    struct Key {
        std::uint64_t t;
        std::uint64_t x;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept { return std::hash<std::uint64_t>{}(k.t * 0x9E3779B97F4A7C15ULL ^ k.x); }
    };
    struct Memo {
        std::mutex mutex;
        std::unordered_map<Key, double, KeyHash> values;
    };

    std::string name_;
    Fn fn_;
    std::unique_ptr<Memo> memo_;
};

/// Which built-in linearisation suits a problem.
enum class StrategyKind { lag_mean, porous_q1, porous_q2, custom };

/// Finite-difference description of problems of the form
///   u_t + advection * u u_x - diffusion * u_xx = f.
struct BurgersForm {
    double diffusion = 0.0;
    double advection = 1.0;
};

/// D u = f on [t0, t1] x [x_left, x_right], u(t0, x) = g(x), u = h on the boundary.
/// D = P + nonlinear_scale * Q with P constant-coefficient and Q supplied by a linearisation.
struct PDEProblem {
    std::string id;
    double t_start = 0.0;
    double t_end = 1.0;
    double x_left = 0.0;
    double x_right = 1.0;
    CountedFunction f;
    CountedFunction g;  // evaluated as g(t_start, x)
    CountedFunction h;
    OperatorTerms p_terms;
    double nonlinear_scale = 1.0;
    StrategyKind strategy_hint = StrategyKind::lag_mean;
    std::optional<BurgersForm> burgers_form;
    std::function<double(double, double)> truth;  // empty when no closed form exists
    std::optional<double> analytic_mass;
    std::map<std::string, double> params;

    [[nodiscard]] double eval_g(double x) const { return g(t_start, x); }
};

struct EvalCounts {
    std::uint64_t f = 0;
    std::uint64_t g = 0;
    std::uint64_t h = 0;
    friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

EvalCounts eval_counts(const PDEProblem& problem);
void reset_counts(const PDEProblem& problem);

/// u_t + u u_x - 0.02 u_xx = 0 on [0, 30] x [0, 2 pi] with closed-form truth.
PDEProblem burgers_homogeneous();
/// u_t - (u^2)_xx = 0 on [2, 10] x [-10, 10] with the Barenblatt truth.
PDEProblem porous_medium();
/// u_t + u u_x - u_xx = f on [0, 30] x [0, 1], zero initial and boundary data.
PDEProblem burgers_forced(double forcing_scale = 1.0);
/// u_t - alpha u_xx = 0 with the given initial condition and zero boundary values.
PDEProblem heat_equation(double alpha, std::function<double(double)> initial, double x_left, double x_right,
                         double t_end, std::function<double(double, double)> truth = {});

/// Barenblatt profile max(0, t^{-1/3}(1 - x^2 / (12 t^{2/3}))).
double barenblatt(double t, double x);

/// Identifiers accepted by make_problem.
std::vector<std::string> problem_ids();
/// Builds a fresh instance (own counters) by identifier; throws InvalidArgument if unknown.
PDEProblem make_problem(const std::string& id);

}  // namespace pnpde
