#pragma once

namespace vhc {

// Fresnel integrals C(x) = int_0^x cos(pi t^2/2) dt and
// S(x) = int_0^x sin(pi t^2/2) dt, to 1e-10 absolute. Power series for
// |x| <= 3, adaptive quadrature beyond; both functions are odd.
double fresnel_C(double x);
double fresnel_S(double x);

}  // namespace vhc
