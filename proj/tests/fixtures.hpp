#pragma once

// Shared fixture builders for the bundled reduced-dynamics examples.

#include <cmath>

#include "vhc/reduced.hpp"
#include "vhc/virtual_pair.hpp"

namespace fixtures {

inline constexpr double kTwoPi = 6.283185307179586;

inline vhc::ReducedDynamics make(const char* psi1, const char* psi2,
                                 vhc::Topology topo = vhc::Topology::Circle,
                                 double period = kTwoPi) {
    using namespace vhc;
    return make_reduced(ScalarFunction::from_expr(parse(psi1, {"s"}), "s"),
                        ScalarFunction::from_expr(parse(psi2, {"s"}), "s"), topo,
                        topo == Topology::Circle ? period : 0.0);
}

// sdd = [sin(2s) - sin(s) sd^2]/(2 + cos s): EL mechanical,
// M(x) = 9/(cos x + 2)^2, V(x) = 4 - 18(cos x + 1)/(cos x + 2)^2
inline vhc::ReducedDynamics ex1() { return make("sin(2*s)/(2+cos(s))", "-sin(s)/(2+cos(s))"); }
inline double ex1_M(double x) { return 9.0 / std::pow(std::cos(x) + 2.0, 2); }
inline double ex1_V(double x) {
    return 4.0 - 18.0 * (std::cos(x) + 1.0) / std::pow(std::cos(x) + 2.0, 2);
}

// sdd = cos s + 1/2 + cos(s) sd^2: SEL, M(x) = exp(-2 sin x)
inline vhc::ReducedDynamics ex2() { return make("cos(s)+0.5", "cos(s)"); }
inline double ex2_M(double x) { return std::exp(-2.0 * std::sin(x)); }

// sdd = lambda
inline vhc::ReducedDynamics ex3(double lambda = 0.7) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", lambda);
    return make(buf, "0");
}

// sdd = -cos s - 2 + (sin s + 2) sd^2: non-Lagrangian with a stable limit cycle
inline vhc::ReducedDynamics ex4() { return make("-cos(s)-2", "sin(s)+2"); }

inline vhc::ReducedDynamics line_pendulum() {
    return make("-sin(s)", "0.1*cos(s)", vhc::Topology::Line);
}

}  // namespace fixtures
