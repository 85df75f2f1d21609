#pragma once

#include <string>

#include "vhc/virtual_pair.hpp"

namespace vhc {

enum class StructureKind { MechanicalLine, ELMechanical, SEL, NonLagrangian };

std::string to_string(StructureKind k);

struct Classification {
    StructureKind kind = StructureKind::NonLagrangian;
    // evidence
    double MT = 1.0;
    double VT = 0.0;
    double eps_M = 1e-6;
    double eps_V = 1e-6;
    double scale = 1.0;  // max(1, max|V| on [0,T])
    bool limit_cycle_hypotheses = false;
};

// Decision rules:
//   Line                                  -> MechanicalLine (unconditional)
//   |M(T)-1| <= eps_M and |V(T)| <= eps_V*scale -> ELMechanical
//   |M(T)-1| <= eps_M and |V(T)| >  eps_V*scale -> SEL
//   |M(T)-1| >  eps_M                     -> NonLagrangian
Classification classify(const VirtualPair& vp, Topology topology, double eps_M = 1e-6,
                        double eps_V = 1e-6);

// True iff Psi1 keeps a strict sign on the grid (margin quad_tol) and
// int_0^T Psi2 has the strictly opposite sign (margin quad_tol).
bool limit_cycle_hypotheses(const ReducedDynamics& rd, const VirtualPair& vp);

}  // namespace vhc
