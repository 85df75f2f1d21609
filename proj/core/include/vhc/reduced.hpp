#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vhc/expr.hpp"

namespace vhc {

enum class Topology { Line, Circle };

// A scalar function of one real variable. Three backings:
//  - expression (with a precompiled tape),
//  - uniform periodic grid (cubic interpolation),
//  - arbitrary callable (used by coordinate transforms).
// Immutable and cheap to copy; evaluation is thread-safe.
class ScalarFunction {
public:
    ScalarFunction() = default;

    static ScalarFunction from_expr(ExprPtr e, const std::string& var = "s");
    // `values` sampled at x_k = k*period/N, k = 0..N-1.
    static ScalarFunction from_periodic_grid(std::vector<double> values, double period);
    static ScalarFunction from_callable(std::function<double(double)> f);

    double operator()(double x) const;
    bool valid() const { return impl_ != nullptr; }

    // Expression backing, or nullptr.
    const ExprPtr& expr() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// The reduced dynamics  s'' = Psi1(s) + Psi2(s) s'^2  on the line or on the
// circle of circumference `period`.
struct ReducedDynamics {
    ScalarFunction psi1;
    ScalarFunction psi2;
    Topology topology = Topology::Line;
    double period = 0.0;  // meaningful only for Circle

    // Lifted evaluation: on the circle the argument is wrapped into
    // [0, period) first, so the lift is T-periodic by construction.
    double psi1_lift(double x) const;
    double psi2_lift(double x) const;
};

// Validates and assembles a ReducedDynamics. For Circle topology with
// expression-backed Psi's, value and first-derivative continuity at the seam
// s = 0 ~ T is required to 1e-9 (relative).
ReducedDynamics make_reduced(ScalarFunction psi1, ScalarFunction psi2, Topology topology,
                             double period);

}  // namespace vhc
