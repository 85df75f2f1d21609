#include "vhc/classify.hpp"

#include <cmath>

namespace vhc {

std::string to_string(StructureKind k) {
    switch (k) {
        case StructureKind::MechanicalLine: return "mechanical_line";
        case StructureKind::ELMechanical: return "el_mechanical";
        case StructureKind::SEL: return "sel";
        case StructureKind::NonLagrangian: return "non_lagrangian";
    }
    return "?";
}

namespace {

bool hypotheses_impl(const VirtualPair& vp) {
    if (vp.topology() != Topology::Circle) return false;
    const int n = vp.grid_size();
    const double h = vp.domain() / n;
    double lo = vp.psi1(0.0), hi = lo;
    for (int k = 1; k < n; ++k) {
        double v = vp.psi1(k * h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // int_0^T Psi2 = -log(M(T))/2
    double i2 = -0.5 * std::log(vp.MT());
    double margin = vp.quad_tol();
    bool psi1_pos = lo > margin;
    bool psi1_neg = hi < -margin;
    return (psi1_pos && i2 < -margin) || (psi1_neg && i2 > margin);
}

}  // namespace

Classification classify(const VirtualPair& vp, Topology topology, double eps_M, double eps_V) {
    Classification c;
    c.MT = vp.MT();
    c.VT = vp.VT();
    c.eps_M = eps_M;
    c.eps_V = eps_V;
    c.scale = std::max(1.0, std::max(std::fabs(vp.Vmin()), std::fabs(vp.Vmax())));
    if (topology == Topology::Line) {
        c.kind = StructureKind::MechanicalLine;
        return c;
    }
    c.limit_cycle_hypotheses = hypotheses_impl(vp);
    if (std::fabs(c.MT - 1.0) > eps_M)
        c.kind = StructureKind::NonLagrangian;
    else if (std::fabs(c.VT) > eps_V * c.scale)
        c.kind = StructureKind::SEL;
    else
        c.kind = StructureKind::ELMechanical;
    return c;
}

bool limit_cycle_hypotheses(const ReducedDynamics& rd, const VirtualPair& vp) {
    (void)rd;
    return hypotheses_impl(vp);
}

}  // namespace vhc
