#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace vhc {

enum class OdeStatus { Done, StepUnderflow, NonFinite };

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    double h_init = 0.0;       // 0 = automatic
    double h_max = 0.0;        // 0 = horizon
    std::size_t max_steps = 100000000;
};

// Dense interpolant over one accepted step [t0, t1] (Dormand-Prince order-4
// continuous extension).
class DenseStep {
public:
    DenseStep(std::size_t dim) : dim_(dim), r_(5 * dim) {}

    double t0() const { return t0_; }
    double t1() const { return t1_; }

    void eval(double t, std::span<double> out) const {
        double th = (t - t0_) / (t1_ - t0_);
        double th1 = 1.0 - th;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double* r = r_.data() + 5 * i;
            out[i] = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
        }
    }

private:
    template <class RHS, class StepCb>
    friend OdeStatus dopri5(RHS&& f, std::span<double> y, double t0, double t1,
                            const OdeOptions& opt, StepCb&& on_step);

    std::size_t dim_;
    double t0_ = 0.0, t1_ = 0.0;
    std::vector<double> r_;  // rcont1..5 interleaved per component
};

// Adaptive embedded Runge-Kutta, Dormand-Prince 5(4) pair with FSAL and
// dense output. f(t, y, dy) fills dy; on_step(const DenseStep&) is invoked
// after every accepted step and may return false to stop early.
template <class RHS, class StepCb>
OdeStatus dopri5(RHS&& f, std::span<double> y, double t0, double t1, const OdeOptions& opt,
                 StepCb&& on_step) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;

    const std::size_t n = y.size();
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const double hmax = opt.h_max > 0 ? opt.h_max : std::fabs(t1 - t0);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    DenseStep dense(n);

    double t = t0;
    f(t, y, k1);
    for (double v : k1)
        if (!std::isfinite(v)) return OdeStatus::NonFinite;

    double h = opt.h_init;
    if (h <= 0) {
        // crude initial step from the scale of y and y'
        double d0 = 0, d1n = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double sc = opt.atol + opt.rtol * std::fabs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1n += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        h = (d1n > 1e-10) ? 0.01 * d0 / d1n : 1e-6;
        h = std::max(h, 1e-10);
        h = std::min(h, hmax);
    }

    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (dir * (t - t1) >= 0) return OdeStatus::Done;
        h = std::min(h, hmax);
        if (dir * (t + dir * h - t1) > 0) h = std::fabs(t1 - t);
        if (h < 1e-14 * std::max(1.0, std::fabs(t)) || t + dir * h == t)
            return OdeStatus::StepUnderflow;
        const double hs = dir * h;

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
        f(t + c2 * hs, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hs, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hs, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hs, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + hs, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + hs, ynew, k7);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
            double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err += (ei / sc) * (ei / sc);
            if (!std::isfinite(ynew[i])) finite = false;
        }
        err = std::sqrt(err / n);

        if (!finite || !std::isfinite(err)) {
            h *= 0.25;
            continue;
        }
        if (err <= 1.0) {
            dense.t0_ = t;
            dense.t1_ = t + hs;
            for (std::size_t i = 0; i < n; ++i) {
                double ydiff = ynew[i] - y[i];
                double bspl = hs * k1[i] - ydiff;
                double* r = dense.r_.data() + 5 * i;
                r[0] = y[i];
                r[1] = ydiff;
                r[2] = bspl;
                r[3] = ydiff - hs * k7[i] - bspl;
                r[4] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                             d7 * k7[i]);
            }
            t += hs;
            std::copy(ynew.begin(), ynew.end(), y.begin());
            std::copy(k7.begin(), k7.end(), k1.begin());  // FSAL
            if (!on_step(dense)) return OdeStatus::Done;
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::clamp(fac, 0.2, 5.0);
        } else {
            double fac = 0.9 * std::pow(err, -0.2);
            h *= std::clamp(fac, 0.1, 1.0);
        }
    }
    return OdeStatus::StepUnderflow;
}

}  // namespace vhc
