#include "vhc/reduced.hpp"

#include <cmath>

#include "vhc/grid.hpp"

namespace vhc {

struct ScalarFunction::Impl {
    // exactly one backing is active
    ExprPtr ast;
    CompiledExpr tape;
    std::vector<double> grid;
    double grid_period = 0.0;
    std::function<double(double)> fn;
};

ScalarFunction ScalarFunction::from_expr(ExprPtr e, const std::string& var) {
    auto impl = std::make_shared<Impl>();
    std::vector<std::string> vars{var};
    impl->tape = CompiledExpr(e, vars);
    impl->ast = std::move(e);
    ScalarFunction f;
    f.impl_ = std::move(impl);
    return f;
}

ScalarFunction ScalarFunction::from_periodic_grid(std::vector<double> values, double period) {
    auto impl = std::make_shared<Impl>();
    impl->grid = std::move(values);
    impl->grid_period = period;
    ScalarFunction f;
    f.impl_ = std::move(impl);
    return f;
}

ScalarFunction ScalarFunction::from_callable(std::function<double(double)> fn) {
    auto impl = std::make_shared<Impl>();
    impl->fn = std::move(fn);
    ScalarFunction f;
    f.impl_ = std::move(impl);
    return f;
}

double ScalarFunction::operator()(double x) const {
    const Impl& i = *impl_;
    if (i.ast) return i.tape(x);
    if (!i.grid.empty()) return interp_periodic(i.grid, i.grid_period, x);
    return i.fn(x);
}

const ExprPtr& ScalarFunction::expr() const {
    static const ExprPtr null;
    return impl_ && impl_->ast ? impl_->ast : null;
}

double ReducedDynamics::psi1_lift(double x) const {
    return topology == Topology::Circle ? psi1(wrap_mod(x, period)) : psi1(x);
}

double ReducedDynamics::psi2_lift(double x) const {
    return topology == Topology::Circle ? psi2(wrap_mod(x, period)) : psi2(x);
}

namespace {

void check_seam(const ScalarFunction& f, double period, const char* which) {
    auto rel_close = [](double a, double b) {
        return std::fabs(a - b) <= 1e-9 * (1.0 + std::fabs(a) + std::fabs(b));
    };
    if (!rel_close(f(0.0), f(period)))
        throw ModelError(std::string(which) + " is not periodic at the seam: value mismatch");
    if (f.expr()) {
        // derivative continuity, checked symbolically when possible
        auto vars = variables_of(f.expr());
        std::string var = vars.empty() ? std::string("s") : vars.front();
        ExprPtr d = differentiate(f.expr(), var);
        std::map<std::string, double> b0{{var, 0.0}}, bT{{var, period}};
        if (!rel_close(evaluate(d, b0), evaluate(d, bT)))
            throw ModelError(std::string(which) + " is not periodic at the seam: derivative mismatch");
    }
}

}  // namespace

ReducedDynamics make_reduced(ScalarFunction psi1, ScalarFunction psi2, Topology topology,
                             double period) {
    if (topology == Topology::Circle) {
        if (!(period > 0.0)) throw ModelError("circle topology requires a positive period");
        check_seam(psi1, period, "psi1");
        check_seam(psi2, period, "psi2");
    }
    ReducedDynamics rd;
    rd.psi1 = std::move(psi1);
    rd.psi2 = std::move(psi2);
    rd.topology = topology;
    rd.period = topology == Topology::Circle ? period : 0.0;
    return rd;
}

}  // namespace vhc
