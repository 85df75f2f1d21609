#include "vhc/virtual_pair.hpp"

#include <algorithm>
#include <cmath>

#include "vhc/grid.hpp"
#include "vhc/quadrature.hpp"

namespace vhc {

VirtualPair virtual_pair(const ReducedDynamics& rd, int N, double quad_tol, double line_domain) {
    if (N < 64) throw NumericalError("virtual_pair requires N >= 64");
    if (!(quad_tol > 0.0)) throw NumericalError("virtual_pair requires quad_tol > 0");

    VirtualPair vp;
    vp.topology_ = rd.topology;
    vp.domain_ = rd.topology == Topology::Circle ? rd.period : line_domain;
    vp.quad_tol_ = quad_tol;
    vp.psi1_ = [rd](double x) { return rd.psi1_lift(x); };
    vp.psi2_ = [rd](double x) { return rd.psi2_lift(x); };

    const double h = vp.domain_ / N;
    const double cell_tol = quad_tol / N;
    // the absolute per-cell budget is scaled up when the integrand itself is
    // large, where an absolute quad_tol would sit below the fp noise floor
    auto scaled = [cell_tol](double magnitude) {
        return cell_tol * std::max(1.0, magnitude);
    };

    // cumulative integral of Psi2, then M = exp(-2 * cum)
    vp.grid_M_.resize(N + 1);
    std::vector<double> cum2(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) {
        double a = (k - 1) * h;
        double cell = adaptive_simpson(vp.psi2_, a, a + h, scaled(std::fabs(vp.psi2_(a)) * h));
        cum2[k] = cum2[k - 1] + cell;
        vp.grid_M_[k] = std::exp(-2.0 * cum2[k]);
    }
    vp.grid_M_[0] = 1.0;

    // V cells: the integrand Psi1(t)*M(t) needs M inside the cell, produced
    // by a nested quadrature anchored at the cell's left node.
    vp.grid_V_.resize(N + 1);
    vp.grid_V_[0] = 0.0;
    for (int k = 1; k <= N; ++k) {
        double a = (k - 1) * h;
        double base = cum2[k - 1];
        auto integrand = [&](double t) {
            double inner = adaptive_simpson(vp.psi2_, a, t, 0.25 * cell_tol);
            return vp.psi1_(t) * std::exp(-2.0 * (base + inner));
        };
        // 8x headroom over the noise floor the inner quadrature imposes on
        // the exponentiated integrand (only relevant when M is large; for
        // O(1) values the absolute budget quad_tol/N is unchanged)
        double mag = std::fabs(vp.psi1_(a)) * vp.grid_M_[k - 1] * h;
        double cell = adaptive_simpson(integrand, a, a + h, scaled(8.0 * mag));
        vp.grid_V_[k] = vp.grid_V_[k - 1] - cell;
    }

    vp.MT_ = vp.grid_M_[N];
    vp.VT_ = vp.grid_V_[N];
    vp.Vmin_ = *std::min_element(vp.grid_V_.begin(), vp.grid_V_.end());
    vp.Vmax_ = *std::max_element(vp.grid_V_.begin(), vp.grid_V_.end());

    for (double m : vp.grid_M_)
        if (!(m > 0.0) || !std::isfinite(m))
            throw NumericalError("virtual mass is not positive on the grid");
    return vp;
}

namespace {

double interp_node(const std::vector<double>& values, double h, double x) {
    return interp_clamped(values, h, x);
}

}  // namespace

double VirtualPair::direct_M(double x) const {
    // quadrature extension from the nearest cached anchor (0 or domain)
    double anchor = 0.0, base = 0.0;
    if (x > domain_) {
        anchor = domain_;
        base = -0.5 * std::log(MT_);
    }
    double tail = adaptive_simpson(psi2_, anchor, x, quad_tol_);
    return std::exp(-2.0 * (base + tail));
}

double VirtualPair::direct_V(double x) const {
    double anchor = 0.0, baseV = 0.0;
    if (x > domain_) {
        anchor = domain_;
        baseV = VT_;
    }
    auto integrand = [&](double t) { return psi1_(t) * direct_M(t); };
    return baseV - adaptive_simpson(integrand, anchor, x, quad_tol_);
}

double VirtualPair::eval_M(double x) const {
    const double h = domain_ / grid_size();
    if (topology_ == Topology::Line) {
        if (x >= 0.0 && x <= domain_) return interp_node(grid_M_, h, x);
        return direct_M(x);
    }
    double n = std::floor(x / domain_);
    double x0 = x - n * domain_;
    if (x0 >= domain_) {
        x0 -= domain_;
        n += 1.0;
    }
    double base = interp_node(grid_M_, h, x0);
    return std::pow(MT_, n) * base;
}

double VirtualPair::eval_V(double x) const {
    const double h = domain_ / grid_size();
    if (topology_ == Topology::Line) {
        if (x >= 0.0 && x <= domain_) return interp_node(grid_V_, h, x);
        return direct_V(x);
    }
    double n = std::floor(x / domain_);
    double x0 = x - n * domain_;
    if (x0 >= domain_) {
        x0 -= domain_;
        n += 1.0;
    }
    double v0 = interp_node(grid_V_, h, x0);
    if (std::fabs(MT_ - 1.0) > eps_branch_) {
        double mn = std::pow(MT_, n);
        return mn * v0 + VT_ * (mn - 1.0) / (MT_ - 1.0);
    }
    return v0 + n * VT_;
}

}  // namespace vhc
