#include "vhc/xform.hpp"

#include <cmath>
#include <random>

#include "vhc/grid.hpp"
#include "vhc/quadrature.hpp"

namespace vhc {

CircleDiffeo CircleDiffeo::from_expr(ExprPtr phi, double T1, double T2) {
    CircleDiffeo d;
    d.T1_ = T1;
    d.T2_ = T2;
    auto vars = variables_of(phi);
    std::string var = vars.empty() ? std::string("s") : vars.front();
    if (vars.size() > 1) throw ModelError("diffeomorphism must be a function of one variable");
    std::vector<std::string> vs{var};
    d.phi_e_ = phi;
    d.dphi_e_ = differentiate(phi, var);
    d.ddphi_e_ = differentiate(d.dphi_e_, var);
    d.phi_c_ = CompiledExpr(d.phi_e_, vs);
    d.dphi_c_ = CompiledExpr(d.dphi_e_, vs);
    d.ddphi_c_ = CompiledExpr(d.ddphi_e_, vs);
    d.validate();
    return d;
}

CircleDiffeo CircleDiffeo::from_grid(std::vector<double> phi_vals, std::vector<double> dphi_vals,
                                     double T1, double T2) {
    if (phi_vals.size() != dphi_vals.size() || phi_vals.size() < 9)
        throw ModelError("diffeomorphism grid too small or inconsistent");
    CircleDiffeo d;
    d.T1_ = T1;
    d.T2_ = T2;
    const std::size_t n = phi_vals.size() - 1;  // nodes 0..n over [0, T1]
    double jump = phi_vals.back() - phi_vals.front();
    d.degree_ = jump >= 0 ? +1 : -1;
    double slope = d.degree_ * T2 / T1;
    d.u_grid_.resize(n);
    d.dphi_grid_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double x = T1 * static_cast<double>(k) / static_cast<double>(n);
        d.u_grid_[k] = phi_vals[k] - slope * x;
        d.dphi_grid_[k] = dphi_vals[k];
    }
    d.ddphi_grid_ = periodic_derivative6(d.dphi_grid_, T1);
    d.validate();
    return d;
}

double CircleDiffeo::phi(double x) const {
    if (outer_) return outer_->phi(inner_->phi(x));
    if (!u_grid_.empty()) {
        double slope = degree_ * T2_ / T1_;
        return interp_periodic(u_grid_, T1_, x) + slope * x;
    }
    return phi_c_(x);
}

double CircleDiffeo::dphi(double x) const {
    if (outer_) return outer_->dphi(inner_->phi(x)) * inner_->dphi(x);
    if (!dphi_grid_.empty()) return interp_periodic(dphi_grid_, T1_, x);
    return dphi_c_(x);
}

double CircleDiffeo::ddphi(double x) const {
    if (outer_) {
        double di = inner_->dphi(x);
        return outer_->ddphi(inner_->phi(x)) * di * di + outer_->dphi(inner_->phi(x)) * inner_->ddphi(x);
    }
    if (!ddphi_grid_.empty()) return interp_periodic(ddphi_grid_, T1_, x);
    return ddphi_c_(x);
}

double CircleDiffeo::inverse(double theta) const {
    // shift theta by whole turns so that the preimage lies in [0, T1]
    double p0 = phi(0.0);
    double m = std::floor((theta - p0) / T2_);
    if (degree_ < 0) m = std::floor((p0 - theta) / T2_);
    double th0 = theta - degree_ * m * T2_;
    // bracket within [0, T1] (phi moves by degree*T2 over it); widen once if
    // rounding put th0 just outside
    double lo = 0.0, hi = T1_;
    auto g = [&](double x) { return phi(x) - th0; };
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo + m * T1_;
    if (ghi == 0.0) return hi + m * T1_;
    if (glo * ghi > 0) {
        lo -= T1_;
        hi += T1_;
        glo = g(lo);
        ghi = g(hi);
        if (glo == 0.0) return lo + m * T1_;
        if (ghi == 0.0) return hi + m * T1_;
        if (glo * ghi > 0) throw NumericalError("diffeomorphism inverse: bracketing failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * T1_; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (gm == 0) {
            lo = hi = mid;
            break;
        }
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {  // Newton polish
        double f = g(x), df = dphi(x);
        if (df == 0) break;
        double nx = x - f / df;
        if (nx < lo - 1e-12 || nx > hi + 1e-12) break;
        x = nx;
    }
    return x + m * T1_;
}

CircleDiffeo CircleDiffeo::composed_with(const CircleDiffeo& inner) const {
    if (std::fabs(inner.T2_ - T1_) > 1e-9 * (1.0 + T1_))
        throw ModelError("diffeomorphism composition: period mismatch");
    CircleDiffeo d;
    d.T1_ = inner.T1_;
    d.T2_ = T2_;
    d.degree_ = degree_ * inner.degree_;
    d.outer_ = std::make_shared<CircleDiffeo>(*this);
    d.inner_ = std::make_shared<CircleDiffeo>(inner);
    d.validate();
    return d;
}

void CircleDiffeo::validate() {
    // monotonicity: phi' of constant sign on a grid
    const int G = 512;
    double sign = 0;
    for (int i = 0; i <= G; ++i) {
        double x = T1_ * i / G;
        double dp = dphi(x);
        if (dp == 0 || !std::isfinite(dp))
            throw ModelError("diffeomorphism is not monotone: phi' vanishes on the grid");
        if (sign == 0)
            sign = dp > 0 ? 1 : -1;
        else if ((dp > 0 ? 1 : -1) != sign)
            throw ModelError("diffeomorphism is not monotone: phi' changes sign");
    }
    if (outer_ == nullptr) degree_ = sign > 0 ? +1 : -1;
    // degree relation phi(x+T1) = phi(x) + degree*T2 at 50 random points
    std::mt19937 rng(20240511u);
    std::uniform_real_distribution<double> U(-2.0 * T1_, 2.0 * T1_);
    for (int i = 0; i < 50; ++i) {
        double x = U(rng);
        double lhs = phi(x + T1_) - phi(x);
        double rhs = degree_ * T2_;
        if (std::fabs(lhs - rhs) > 1e-8 * (1.0 + std::fabs(rhs)))
            throw ModelError("diffeomorphism degree relation phi(x+T1) = phi(x) +/- T2 fails");
    }
}

ReducedDynamics transform(const ReducedDynamics& rd1, const CircleDiffeo& d) {
    if (rd1.topology != Topology::Circle)
        throw NumericalError("transform requires circle topology");
    if (std::fabs(rd1.period - d.T1()) > 1e-9 * (1.0 + rd1.period))
        throw ModelError("transform: diffeomorphism domain period does not match the dynamics");

    auto dd = std::make_shared<CircleDiffeo>(d);
    ReducedDynamics rd1c = rd1;
    auto psi1 = [dd, rd1c](double theta) {
        double x = dd->inverse(theta);
        return dd->dphi(x) * rd1c.psi1_lift(x);
    };
    auto psi2 = [dd, rd1c](double theta) {
        double x = dd->inverse(theta);
        double dp = dd->dphi(x);
        return rd1c.psi2_lift(x) / dp + dd->ddphi(x) / (dp * dp);
    };
    ReducedDynamics rd2;
    rd2.psi1 = ScalarFunction::from_callable(psi1);
    rd2.psi2 = ScalarFunction::from_callable(psi2);
    rd2.topology = Topology::Circle;
    rd2.period = d.T2();
    return rd2;
}

std::pair<ReducedDynamics, CircleDiffeo> conservative_form(const ReducedDynamics& rd1,
                                                           const VirtualPair& vp1, double T2,
                                                           double eps_M) {
    if (rd1.topology != Topology::Circle)
        throw NumericalError("conservative_form requires circle topology");
    if (std::fabs(vp1.MT() - 1.0) > eps_M)
        throw NumericalError(
            "conservative form requires a T-periodic virtual mass (|M(T)-1| <= eps_M)");

    const double T1 = rd1.period;
    const int N = vp1.grid_size();
    const double h = T1 / N;
    std::vector<double> cum(N + 1, 0.0);
    auto w = [&vp1](double x) { return std::sqrt(vp1.eval_M(x)); };
    for (int k = 1; k <= N; ++k)
        cum[k] = cum[k - 1] + adaptive_simpson(w, (k - 1) * h, k * h, vp1.quad_tol() / N);
    const double lambda = T2 / cum[N];

    std::vector<double> phi_vals(N + 1), dphi_vals(N + 1);
    for (int k = 0; k <= N; ++k) {
        phi_vals[k] = lambda * cum[k];
        dphi_vals[k] = lambda * w(k * h);
    }
    CircleDiffeo d = CircleDiffeo::from_grid(std::move(phi_vals), std::move(dphi_vals), T1, T2);
    return {transform(rd1, d), d};
}

}  // namespace vhc
