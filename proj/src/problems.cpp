#include "pnpde/problems.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pnpde/errors.hpp"

namespace pnpde {

CountedFunction::CountedFunction() : memo_(std::make_unique<Memo>()) {}

CountedFunction::CountedFunction(std::string name, Fn fn)
    : name_(std::move(name)), fn_(std::move(fn)), memo_(std::make_unique<Memo>()) {}

double CountedFunction::operator()(double t, double x) const {
    if (!fn_) throw InvalidArgument("function '" + name_ + "' is not set");
    // +0.0 and -0.0 share a key.
    const Key key{std::bit_cast<std::uint64_t>(t + 0.0), std::bit_cast<std::uint64_t>(x + 0.0)};
    std::lock_guard lock(memo_->mutex);
    if (auto it = memo_->values.find(key); it != memo_->values.end()) return it->second;
    const double v = fn_(t, x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite evaluation of " << name_ << " at (t=" << t << ", x=" << x << ")";
        throw NonFiniteEvaluation(os.str());
    }
    memo_->values.emplace(key, v);
    return v;
}

std::uint64_t CountedFunction::count() const {
    std::lock_guard lock(memo_->mutex);
    return memo_->values.size();
}

void CountedFunction::reset() const {
    std::lock_guard lock(memo_->mutex);
    memo_->values.clear();
}

EvalCounts eval_counts(const PDEProblem& problem) {
    return {problem.f.count(), problem.g.count(), problem.h.count()};
}

void reset_counts(const PDEProblem& problem) {
    problem.f.reset();
    problem.g.reset();
    problem.h.reset();
}

namespace {

auto zero_field() {
    return [](double, double) { return 0.0; };
}

}  // namespace

double barenblatt(double t, double x) {
    return std::max(0.0, std::pow(t, -1.0 / 3.0) * (1.0 - x * x / (12.0 * std::pow(t, 2.0 / 3.0))));
}

PDEProblem burgers_homogeneous() {
    constexpr double alpha = 0.02, a = 1.0, b = 2.0, k = 1.0;
    auto truth = [=](double t, double x) {
        const double e = a * std::exp(-alpha * k * k * t);
        return 2.0 * alpha * e * k * std::sin(k * x) / (b + e * std::cos(k * x));
    };
    PDEProblem p;
    p.id = "burgers";
    p.t_start = 0.0;
    p.t_end = 30.0;
    p.x_left = 0.0;
    p.x_right = 2.0 * std::numbers::pi;
    p.f = CountedFunction("f", zero_field());
    p.g = CountedFunction("g", [=](double, double x) { return truth(0.0, x); });
    p.h = CountedFunction("h", zero_field());
    p.p_terms = {{1.0, {1, 0}}, {-alpha, {0, 2}}};
    p.nonlinear_scale = 1.0;
    p.strategy_hint = StrategyKind::lag_mean;
    p.burgers_form = BurgersForm{alpha, 1.0};
    p.truth = truth;
    p.params = {{"alpha", alpha}, {"a", a}, {"b", b}, {"k", k}, {"T", 30.0}, {"L", 2.0 * std::numbers::pi}};
    return p;
}

PDEProblem porous_medium() {
    constexpr double t0 = 2.0;
    PDEProblem p;
    p.id = "porous";
    p.t_start = t0;
    p.t_end = t0 + 8.0;
    p.x_left = -10.0;
    p.x_right = 10.0;
    p.f = CountedFunction("f", zero_field());
    p.g = CountedFunction("g", [=](double, double x) {
        return std::pow(t0, -1.0 / 3.0) * std::max(0.0, 1.0 - x * x / (12.0 * std::pow(t0, 2.0 / 3.0)));
    });
    p.h = CountedFunction("h", zero_field());
    p.p_terms = {{1.0, {1, 0}}};
    // u_t - 2 (u_x)^2 - 2 u u_xx = 0: the strategy supplies the bracketed pair, scaled by -2.
    p.nonlinear_scale = -2.0;
    p.strategy_hint = StrategyKind::porous_q1;
    p.truth = barenblatt;
    p.analytic_mass = 4.0 * (std::sqrt(3.0) - 1.0 / std::sqrt(3.0));
    p.params = {{"k", 2.0}, {"t0", t0}, {"T", 8.0}, {"L", 20.0}};
    return p;
}

PDEProblem burgers_forced(double forcing_scale) {
    constexpr double alpha = 1.0;
    constexpr double pi = std::numbers::pi;
    PDEProblem p;
    p.id = forcing_scale == 1.0 ? "burgers_forced" : "burgers_forced_scaled";
    p.t_start = 0.0;
    p.t_end = 30.0;
    p.x_left = 0.0;
    p.x_right = 1.0;
    p.f = CountedFunction("f", [=](double t, double x) {
        return forcing_scale * (10.0 * std::sin(6.0 * pi * x) * std::cos(3.0 * pi * t) +
                                2.0 * std::abs(std::sin(3.0 * pi * x) * std::cos(6.0 * pi * t)));
    });
    p.g = CountedFunction("g", zero_field());
    p.h = CountedFunction("h", zero_field());
    p.p_terms = {{1.0, {1, 0}}, {-alpha, {0, 2}}};
    p.nonlinear_scale = 1.0;
    p.strategy_hint = StrategyKind::lag_mean;
    p.burgers_form = BurgersForm{alpha, 1.0};
    p.params = {{"alpha", alpha}, {"T", 30.0}, {"L", 1.0}, {"forcing_scale", forcing_scale}};
    return p;
}

PDEProblem heat_equation(double alpha, std::function<double(double)> initial, double x_left, double x_right,
                         double t_end, std::function<double(double, double)> truth) {
    PDEProblem p;
    p.id = "heat";
    p.t_start = 0.0;
    p.t_end = t_end;
    p.x_left = x_left;
    p.x_right = x_right;
    p.f = CountedFunction("f", zero_field());
    p.g = CountedFunction("g", [initial = std::move(initial)](double, double x) { return initial(x); });
    p.h = CountedFunction("h", zero_field());
    p.p_terms = {{1.0, {1, 0}}, {-alpha, {0, 2}}};
    p.nonlinear_scale = 0.0;
    p.strategy_hint = StrategyKind::lag_mean;
    p.burgers_form = BurgersForm{alpha, 0.0};
    p.truth = std::move(truth);
    p.params = {{"alpha", alpha}};
    return p;
}

std::vector<std::string> problem_ids() {
    return {"burgers", "porous", "burgers_forced", "burgers_forced_zero", "heat_zero"};
}

PDEProblem make_problem(const std::string& id) {
    if (id == "burgers") return burgers_homogeneous();
    if (id == "porous") return porous_medium();
    if (id == "burgers_forced") return burgers_forced();
    if (id == "burgers_forced_zero") {
        auto p = burgers_forced(0.0);
        p.id = id;
        p.truth = [](double, double) { return 0.0; };
        return p;
    }
    if (id == "heat_zero") {
        auto p = heat_equation(1.0, [](double) { return 0.0; }, 0.0, 1.0, 1.0, [](double, double) { return 0.0; });
        p.id = id;
        return p;
    }
    throw InvalidArgument("unknown problem '" + id + "'");
}

}  // namespace pnpde
