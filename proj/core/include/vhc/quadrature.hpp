#pragma once

#include <cmath>
#include <limits>

#include "vhc/errors.hpp"

namespace vhc {

// Adaptive Simpson with the classic |S2-S1|/15 error estimate. Throws
// NumericalError on non-finite integrands or when the subdivision budget is
// exhausted before reaching `tol` (absolute).
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    struct Impl {
        F& f;
        int max_depth;
        double run(double a, double fa, double m, double fm, double b, double fb,
                   double whole, double tol, int depth) {
            double lm = 0.5 * (a + m);
            double rm = 0.5 * (m + b);
            double flm = f(lm);
            double frm = f(rm);
            if (!std::isfinite(flm) || !std::isfinite(frm))
                throw NumericalError("non-finite integrand in adaptive quadrature");
            double h = b - a;
            double left = (h / 12.0) * (fa + 4.0 * flm + fm);
            double right = (h / 12.0) * (fm + 4.0 * frm + fb);
            double err = (left + right - whole) / 15.0;
            if (std::fabs(err) <= tol || h * h == 0.0) return left + right + err;
            if (depth >= max_depth)
                throw NumericalError("adaptive quadrature subdivision budget exceeded");
            return run(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
                   run(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
        }
    };
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
        throw NumericalError("non-finite integrand in adaptive quadrature");
    double whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    Impl impl{f, max_depth};
    return impl.run(a, fa, m, fm, b, fb, whole, tol, 0);
}

}  // namespace vhc
