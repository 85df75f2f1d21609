#include "vhc/lagrangian.hpp"

#include <cmath>

#include "vhc/fresnel.hpp"

namespace vhc {

double energy(const VirtualPair& vp, double x, double xdot) {
    return 0.5 * vp.eval_M(x) * xdot * xdot + vp.eval_V(x);
}

LagrangianHandle LagrangianHandle::mechanical(VirtualPair vp) {
    LagrangianHandle h;
    h.variant_ = Variant::Mechanical;
    h.vp_ = std::move(vp);
    return h;
}

LagrangianHandle LagrangianHandle::singular_fresnel(double f0, VirtualPair vp) {
    if (f0 == 0.0 || !std::isfinite(f0))
        throw NumericalError("singular Lagrangian requires finite nonzero f0 = 1/V(T)");
    LagrangianHandle h;
    h.variant_ = Variant::SingularFresnel;
    h.f0_ = f0;
    h.vp_ = std::move(vp);
    return h;
}

namespace {

constexpr double kPi = 3.141592653589793;

struct FresnelTerms {
    double M, V, Mp, Vp;   // M, V and their x-derivatives
    double r, rp, z, E, Ex;
    double sinE, cosE;     // of theta*E
    double G, H;           // eps cos(thV) C +- ... (see below)
    double eps, theta;
};

FresnelTerms prepare(const VirtualPair& vp, double f0, double x, double xdot) {
    FresnelTerms t;
    t.eps = f0 > 0 ? 1.0 : -1.0;
    t.theta = 2.0 * kPi * f0;
    t.M = vp.eval_M(x);
    t.V = vp.eval_V(x);
    t.Mp = vp.M_prime(x);
    t.Vp = vp.V_prime(x);
    t.r = std::sqrt(2.0 * std::fabs(f0) * t.M);
    t.rp = std::fabs(f0) * t.Mp / t.r;
    t.z = t.r * xdot;
    t.E = 0.5 * t.M * xdot * xdot + t.V;
    t.Ex = 0.5 * t.Mp * xdot * xdot + t.Vp;
    t.sinE = std::sin(t.theta * t.E);
    t.cosE = std::cos(t.theta * t.E);
    double cV = std::cos(t.theta * t.V);
    double sV = std::sin(t.theta * t.V);
    double C = fresnel_C(t.z);
    double S = fresnel_S(t.z);
    t.G = t.eps * cV * C - sV * S;
    t.H = t.eps * sV * C + cV * S;
    return t;
}

}  // namespace

double LagrangianHandle::eval(double x, double xdot) const {
    if (variant_ == Variant::Mechanical)
        return 0.5 * vp_.eval_M(x) * xdot * xdot - vp_.eval_V(x);
    FresnelTerms t = prepare(vp_, f0_, x, xdot);
    return -t.sinE + kPi * t.z * t.G;
}

double LagrangianHandle::dL_dxdot(double x, double xdot) const {
    if (variant_ == Variant::Mechanical) return vp_.eval_M(x) * xdot;
    FresnelTerms t = prepare(vp_, f0_, x, xdot);
    return kPi * t.r * t.G;
}

double LagrangianHandle::dL_dx(double x, double xdot) const {
    if (variant_ == Variant::Mechanical)
        return 0.5 * vp_.M_prime(x) * xdot * xdot - vp_.V_prime(x);
    FresnelTerms t = prepare(vp_, f0_, x, xdot);
    return -t.theta * t.Ex * t.cosE + kPi * t.rp * xdot * t.G -
           kPi * t.r * xdot * t.theta * t.Vp * t.H +
           kPi * t.eps * t.r * t.rp * xdot * xdot * t.cosE;
}

double LagrangianHandle::alpha(double x, double xdot) const {
    if (variant_ == Variant::Mechanical) return vp_.eval_M(x);
    FresnelTerms t = prepare(vp_, f0_, x, xdot);
    return t.theta * t.M * t.cosE;
}

double LagrangianHandle::el_residual(double x, double xdot, double xddot) const {
    if (variant_ == Variant::Mechanical) {
        // d/dt(M xdot) - (M'/2 xdot^2 - V')
        return vp_.eval_M(x) * xddot + 0.5 * vp_.M_prime(x) * xdot * xdot + vp_.V_prime(x);
    }
    FresnelTerms t = prepare(vp_, f0_, x, xdot);
    double a = t.theta * t.M * t.cosE;
    double d2L_dx_dxdot = kPi * t.rp * t.G - kPi * t.r * t.theta * t.Vp * t.H +
                          kPi * t.eps * t.r * t.rp * xdot * t.cosE;
    double dLdx = -t.theta * t.Ex * t.cosE + kPi * t.rp * xdot * t.G -
                  kPi * t.r * xdot * t.theta * t.Vp * t.H +
                  kPi * t.eps * t.r * t.rp * xdot * xdot * t.cosE;
    return a * xddot + d2L_dx_dxdot * xdot - dLdx;
}

LagrangianHandle synthesize(const Classification& cls, const VirtualPair& vp) {
    switch (cls.kind) {
        case StructureKind::MechanicalLine:
        case StructureKind::ELMechanical:
            return LagrangianHandle::mechanical(vp);
        case StructureKind::SEL:
            return LagrangianHandle::singular_fresnel(1.0 / vp.VT(), vp);
        case StructureKind::NonLagrangian:
            break;
    }
    throw NumericalError(
        "no global Lagrangian exists: virtual mass is not T-periodic (non-Lagrangian reduced dynamics)");
}

}  // namespace vhc
