#include "vhc/fresnel.hpp"

#include <cmath>

#include "vhc/quadrature.hpp"

namespace vhc {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

// C(x) = sum (-1)^n (pi/2)^(2n)   x^(4n+1) / ((2n)!   (4n+1))
// S(x) = sum (-1)^n (pi/2)^(2n+1) x^(4n+3) / ((2n+1)! (4n+3))
double series_C(double x) {
    double x4 = x * x * x * x;
    double term = x;  // n = 0 coefficient times x^1
    double sum = term;
    double coef = 1.0;  // (pi/2)^(2n) / (2n)!
    for (int n = 1; n < 60; ++n) {
        coef *= -kHalfPi * kHalfPi / ((2 * n - 1) * (2 * n));
        term *= x4;
        double add = coef * term / (4 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-17 * (1.0 + std::fabs(sum))) break;
    }
    return sum;
}

double series_S(double x) {
    double x4 = x * x * x * x;
    double x3 = x * x * x;
    double coef = kHalfPi;  // (pi/2)^(2n+1) / (2n+1)!
    double term = x3;
    double sum = coef * term / 3.0;
    for (int n = 1; n < 60; ++n) {
        coef *= -kHalfPi * kHalfPi / ((2 * n) * (2 * n + 1));
        term *= x4;
        double add = coef * term / (4 * n + 3);
        sum += add;
        if (std::fabs(add) < 1e-17 * (1.0 + std::fabs(sum))) break;
    }
    return sum;
}

}  // namespace

double fresnel_C(double x) {
    double ax = std::fabs(x);
    double v;
    if (ax <= 3.0) {
        v = series_C(ax);
    } else {
        v = series_C(3.0) +
            adaptive_simpson([](double t) { return std::cos(kHalfPi * t * t); }, 3.0, ax, 1e-12, 60);
    }
    return x < 0 ? -v : v;
}

double fresnel_S(double x) {
    double ax = std::fabs(x);
    double v;
    if (ax <= 3.0) {
        v = series_S(ax);
    } else {
        v = series_S(3.0) +
            adaptive_simpson([](double t) { return std::sin(kHalfPi * t * t); }, 3.0, ax, 1e-12, 60);
    }
    return x < 0 ? -v : v;
}

}  // namespace vhc
