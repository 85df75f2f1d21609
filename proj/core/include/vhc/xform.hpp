#pragma once

#include <utility>
#include <vector>

#include "vhc/reduced.hpp"
#include "vhc/virtual_pair.hpp"

namespace vhc {

// A diffeomorphism of circles [R]_T1 -> [R]_T2, represented by its lift
// phi: R -> R with phi(x + T1) = phi(x) + degree*T2, degree = +-1, phi'
// of constant sign. Either closed-form (expression) or grid-backed (the
// conservative-form construction, where phi comes from quadrature).
class CircleDiffeo {
public:
    static CircleDiffeo from_expr(ExprPtr phi, double T1, double T2);
    // phi_vals, dphi_vals sampled at x_k = k*T1/N, k = 0..N. dphi must be
    // T1-periodic; phi''(x) is produced by differentiating the dphi grid.
    static CircleDiffeo from_grid(std::vector<double> phi_vals, std::vector<double> dphi_vals,
                                  double T1, double T2);

    double phi(double x) const;
    double dphi(double x) const;
    double ddphi(double x) const;
    // Monotone inverse by bracketing bisection plus Newton refinement.
    double inverse(double theta) const;

    CircleDiffeo composed_with(const CircleDiffeo& inner) const;  // this ∘ inner

    double T1() const { return T1_; }
    double T2() const { return T2_; }
    int degree() const { return degree_; }

private:
    void validate();

    double T1_ = 0, T2_ = 0;
    int degree_ = +1;
    // expression backing
    ExprPtr phi_e_, dphi_e_, ddphi_e_;
    CompiledExpr phi_c_, dphi_c_, ddphi_c_;
    // grid backing: u(x) = phi(x) - degree*(T2/T1)*x is T1-periodic
    std::vector<double> u_grid_, dphi_grid_, ddphi_grid_;
    // composition backing
    std::shared_ptr<const CircleDiffeo> outer_, inner_;
};

// Pushes the reduced dynamics through the bundle map
// (s, sdot) -> (phi(s), phi'(s) sdot):
//   Psi1_2(phi(x)) = phi'(x) Psi1_1(x)
//   Psi2_2(phi(x)) = Psi2_1(x)/phi'(x) + phi''(x)/phi'(x)^2
ReducedDynamics transform(const ReducedDynamics& rd1, const CircleDiffeo& d);

// Builds phi(x) = lambda * int_0^x sqrt(M1), lambda = T2 / int_0^T1 sqrt(M1),
// which yields M2 = 1 and Psi2_2 = 0. Requires M1 to be T1-periodic
// (|M1(T1) - 1| <= eps_M).
std::pair<ReducedDynamics, CircleDiffeo> conservative_form(const ReducedDynamics& rd1,
                                                           const VirtualPair& vp1, double T2,
                                                           double eps_M = 1e-6);

}  // namespace vhc
