#pragma once

#include <vector>

#include "vhc/reduced.hpp"

namespace vhc {

// Grid-sampled virtual mass M(x) = exp(-2 int_0^x Psi2) and virtual
// potential V(x) = -int_0^x Psi1*M, with the boundary values M(T), V(T) and
// evaluation anywhere on the real line through the cocycle identities
//   M(x+nT) = M(T)^n M(x)
//   V(x+nT) = M(T)^n V(x) + V(T)(M(T)^n - 1)/(M(T) - 1)   (M(T) != 1)
//           = V(x) + n V(T)                               (M(T) == 1)
// For line topology the grid covers [0, domain] and values outside are
// produced by direct quadrature extension.
class VirtualPair {
public:
    double eval_M(double x) const;
    double eval_V(double x) const;

    // Exact derivatives of the defining integrals.
    double M_prime(double x) const { return -2.0 * psi2_(x) * eval_M(x); }
    double V_prime(double x) const { return -psi1_(x) * eval_M(x); }

    double MT() const { return MT_; }
    double VT() const { return VT_; }
    double Vmin() const { return Vmin_; }
    double Vmax() const { return Vmax_; }
    double domain() const { return domain_; }
    double quad_tol() const { return quad_tol_; }
    Topology topology() const { return topology_; }
    int grid_size() const { return static_cast<int>(grid_M_.size()) - 1; }

    // Node values M(x_k), V(x_k), x_k = k*domain/N, k = 0..N.
    const std::vector<double>& grid_M() const { return grid_M_; }
    const std::vector<double>& grid_V() const { return grid_V_; }

    // Lifted Psi's the pair was built from.
    double psi1(double x) const { return psi1_(x); }
    double psi2(double x) const { return psi2_(x); }

private:
    friend VirtualPair virtual_pair(const ReducedDynamics&, int, double, double);

    double direct_M(double x) const;
    double direct_V(double x) const;

    std::vector<double> grid_M_, grid_V_;
    double domain_ = 0.0;
    double MT_ = 1.0, VT_ = 0.0, Vmin_ = 0.0, Vmax_ = 0.0;
    double quad_tol_ = 0.0;
    double eps_branch_ = 1e-6;
    Topology topology_ = Topology::Circle;
    std::function<double(double)> psi1_, psi2_;
};

// Builds the pair by adaptive composite Simpson over a cumulative N-cell
// grid; each value carries absolute error <= quad_tol. For line topology the
// grid covers [0, line_domain]. Throws NumericalError on non-finite
// integrands or when refinement stalls.
VirtualPair virtual_pair(const ReducedDynamics& rd, int N = 2048, double quad_tol = 1e-10,
                         double line_domain = 6.283185307179586);

}  // namespace vhc
