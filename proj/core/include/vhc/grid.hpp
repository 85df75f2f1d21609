#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace vhc {

// Wraps x into [0, period).
inline double wrap_mod(double x, double period) {
    double r = x - period * std::floor(x / period);
    if (r >= period) r -= period;  // guard against floor rounding at the seam
    if (r < 0) r = 0;
    return r;
}

// 4-point Lagrange (cubic) interpolation on a uniform grid. `values` holds
// samples at x_k = k*h. Periodic variant indexes modulo N (values has N
// entries covering one period); clamped variant shifts the stencil at the
// ends (values has N+1 entries covering [0, N*h]).

inline double cubic_kernel(double fm1, double f0, double f1, double f2, double u) {
    // u in [0,1] measured from the f0 node
    double a = -fm1 / 6.0 + f0 / 2.0 - f1 / 2.0 + f2 / 6.0;
    double b = fm1 / 2.0 - f0 + f1 / 2.0;
    double c = -fm1 / 3.0 - f0 / 2.0 + f1 - f2 / 6.0;
    return ((a * u + b) * u + c) * u + f0;
}

inline double interp_periodic(std::span<const double> values, double period, double x) {
    const std::size_t n = values.size();
    const double h = period / static_cast<double>(n);
    double u = wrap_mod(x, period) / h;
    auto k = static_cast<std::ptrdiff_t>(std::floor(u));
    if (k >= static_cast<std::ptrdiff_t>(n)) k = static_cast<std::ptrdiff_t>(n) - 1;
    u -= static_cast<double>(k);
    auto at = [&](std::ptrdiff_t i) {
        i %= static_cast<std::ptrdiff_t>(n);
        if (i < 0) i += static_cast<std::ptrdiff_t>(n);
        return values[static_cast<std::size_t>(i)];
    };
    if (u == 0.0) return at(k);  // node values reproduce exactly
    return cubic_kernel(at(k - 1), at(k), at(k + 1), at(k + 2), u);
}

// values[0..N] at x_k = k*h; x must lie in [0, N*h] (clamped outside).
inline double interp_clamped(std::span<const double> values, double h, double x) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size()) - 1;
    double u = x / h;
    auto node = static_cast<std::ptrdiff_t>(std::floor(u));
    if (u == static_cast<double>(node) && node >= 0 && node <= n)
        return values[static_cast<std::size_t>(node)];
    auto k = node;
    if (k < 1) k = 1;
    if (k > n - 2) k = n - 2;
    u -= static_cast<double>(k);
    return cubic_kernel(values[static_cast<std::size_t>(k - 1)], values[static_cast<std::size_t>(k)],
                        values[static_cast<std::size_t>(k + 1)], values[static_cast<std::size_t>(k + 2)], u);
}

// 6th-order central difference of a periodic grid function (N samples over
// one period, spacing h = period/N). A stride > 1 widens the stencil to
// k*h, trading (still negligible) truncation for k times less noise
// amplification when the grid values carry cell-scale wiggle.
inline std::vector<double> periodic_derivative6(std::span<const double> values, double period,
                                                int stride = 1) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size());
    const std::ptrdiff_t k = stride;
    const double h = period / static_cast<double>(n) * static_cast<double>(k);
    auto at = [&](std::ptrdiff_t i) {
        i %= n;
        if (i < 0) i += n;
        return values[static_cast<std::size_t>(i)];
    };
    std::vector<double> d(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i)] =
            (-at(i - 3 * k) + 9.0 * at(i - 2 * k) - 45.0 * at(i - k) + 45.0 * at(i + k) -
             9.0 * at(i + 2 * k) + at(i + 3 * k)) /
            (60.0 * h);
    }
    return d;
}

}  // namespace vhc
