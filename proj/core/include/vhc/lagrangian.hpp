#pragma once

#include "vhc/classify.hpp"
#include "vhc/virtual_pair.hpp"

namespace vhc {

// Total energy E0(x, xdot) = (1/2) M(x) xdot^2 + V(x); an integral of motion
// for EL systems and, on the lift, for SEL systems.
double energy(const VirtualPair& vp, double x, double xdot);

// Synthesized Lagrangian of the reduced dynamics. Two variants:
//   Mechanical       L = (1/2) M(x) xdot^2 - V(x)
//   SingularFresnel  the Fresnel-integral Lagrangian with f0 = 1/V(T);
//                    for f0 < 0 the radicand 2 f0 M is continued through
//                    C(iz) = iC(z), S(iz) = -iS(z), giving
//                    L = -sin(2 pi f0 E0)
//                        + pi z [sgn(f0) cos(2 pi f0 V) C(z) - sin(2 pi f0 V) S(z)],
//                    z = sqrt(2 |f0| M(x)) xdot.
// Partial derivatives are hand-derived closed forms (Fresnel derivatives
// C'(u) = cos(pi u^2/2), S'(u) = sin(pi u^2/2)), not finite differences.
class LagrangianHandle {
public:
    enum class Variant { Mechanical, SingularFresnel };

    static LagrangianHandle mechanical(VirtualPair vp);
    static LagrangianHandle singular_fresnel(double f0, VirtualPair vp);

    Variant variant() const { return variant_; }
    double f0() const { return f0_; }
    const VirtualPair& vp() const { return vp_; }

    double eval(double x, double xdot) const;
    double dL_dx(double x, double xdot) const;
    double dL_dxdot(double x, double xdot) const;
    // alpha = d^2 L / d xdot^2; for SingularFresnel this is
    // 2 pi f0 M(x) cos(2 pi f0 E0), a function with zeros.
    double alpha(double x, double xdot) const;

    // d/dt dL/dxdot - dL/dx with xddot substituted for the acceleration.
    // Identically alpha * (xddot - Psi1 - Psi2 xdot^2).
    double el_residual(double x, double xdot, double xddot) const;

private:
    Variant variant_ = Variant::Mechanical;
    double f0_ = 0.0;
    VirtualPair vp_;
};

// Mechanical for MechanicalLine / ELMechanical, SingularFresnel for SEL;
// throws NumericalError for NonLagrangian input.
LagrangianHandle synthesize(const Classification& cls, const VirtualPair& vp);

inline double el_residual(const LagrangianHandle& h, const ReducedDynamics&, double x,
                          double xdot, double xddot) {
    return h.el_residual(x, xdot, xddot);
}

}  // namespace vhc
