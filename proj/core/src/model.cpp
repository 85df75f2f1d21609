#include "vhc/model.hpp"

#include <cmath>

#include "vhc/ode.hpp"

namespace vhc {

namespace {

CompiledExpr compile(const ExprPtr& e, const std::vector<std::string>& vars) {
    return CompiledExpr(e, vars);
}

}  // namespace

FullModel::FullModel(int n, std::vector<std::vector<ExprPtr>> D, ExprPtr P,
                     std::vector<std::vector<ExprPtr>> B, std::vector<ExprPtr> Bperp,
                     std::vector<ExprPtr> h, std::vector<ExprPtr> sigma, Topology topology,
                     double period)
    : n_(n),
      topology_(topology),
      period_(period),
      D_(std::move(D)),
      B_(std::move(B)),
      P_(std::move(P)),
      Bperp_(std::move(Bperp)),
      h_(std::move(h)),
      sigma_(std::move(sigma)) {
    if (n_ < 2) throw ModelError("full model requires n >= 2");
    if (topology_ == Topology::Circle && !(period_ > 0))
        throw ModelError("circle topology requires a positive period");
    for (int i = 1; i <= n_; ++i) qvars_.push_back("q" + std::to_string(i));
    const std::vector<std::string> svar{"s"};

    auto shape = [&](std::size_t got, std::size_t want, const char* what) {
        if (got != want) throw ModelError(std::string("bad shape for ") + what);
    };
    shape(D_.size(), n_, "D");
    for (auto& row : D_) shape(row.size(), n_, "D row");
    shape(B_.size(), n_, "B");
    for (auto& row : B_) shape(row.size(), n_ - 1, "B row");
    shape(Bperp_.size(), n_, "Bperp");
    shape(h_.size(), n_ - 1, "h");
    shape(sigma_.size(), n_, "sigma");

    dD_.resize(static_cast<std::size_t>(n_) * n_ * n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                dD_[(i * n_ + j) * n_ + k] = differentiate(D_[i][j], qvars_[k]);

    gradP_.resize(n_);
    for (int i = 0; i < n_; ++i) gradP_[i] = differentiate(P_, qvars_[i]);

    dh_.resize(static_cast<std::size_t>(n_ - 1) * n_);
    hess_h_.resize(static_cast<std::size_t>(n_ - 1) * n_ * n_);
    for (int i = 0; i < n_ - 1; ++i) {
        for (int j = 0; j < n_; ++j) {
            dh_[i * n_ + j] = differentiate(h_[i], qvars_[j]);
            for (int k = 0; k < n_; ++k)
                hess_h_[(i * n_ + j) * n_ + k] = differentiate(dh_[i * n_ + j], qvars_[k]);
        }
    }

    sigma_p_.resize(n_);
    sigma_pp_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        sigma_p_[i] = differentiate(sigma_[i], "s");
        sigma_pp_[i] = differentiate(sigma_p_[i], "s");
    }

    auto compile_all = [&](const std::vector<ExprPtr>& src, std::vector<CompiledExpr>& dst,
                           const std::vector<std::string>& vars) {
        dst.reserve(src.size());
        for (const auto& e : src) dst.push_back(compile(e, vars));
    };
    for (auto& row : D_)
        for (auto& e : row) cD_.push_back(compile(e, qvars_));
    for (auto& row : B_)
        for (auto& e : row) cB_.push_back(compile(e, qvars_));
    compile_all(Bperp_, cBperp_, qvars_);
    compile_all(h_, ch_, qvars_);
    compile_all(dh_, cdh_, qvars_);
    compile_all(gradP_, cgradP_, qvars_);
    compile_all(dD_, cdD_, qvars_);
    compile_all(hess_h_, chess_, qvars_);
    compile_all(sigma_, csigma_, svar);
    compile_all(sigma_p_, csigma_p_, svar);
    compile_all(sigma_pp_, csigma_pp_, svar);
}

double FullModel::sample_span() const {
    return topology_ == Topology::Circle ? period_ : line_span_;
}

namespace {

std::span<const double> as_span(const Eigen::VectorXd& q) {
    return {q.data(), static_cast<std::size_t>(q.size())};
}

}  // namespace

Eigen::MatrixXd FullModel::D_at(const Eigen::VectorXd& q) const {
    Eigen::MatrixXd out(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out(i, j) = cD_[i * n_ + j](as_span(q));
    return out;
}

Eigen::VectorXd FullModel::gradP_at(const Eigen::VectorXd& q) const {
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i) out(i) = cgradP_[i](as_span(q));
    return out;
}

Eigen::MatrixXd FullModel::B_at(const Eigen::VectorXd& q) const {
    Eigen::MatrixXd out(n_, n_ - 1);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_ - 1; ++j) out(i, j) = cB_[i * (n_ - 1) + j](as_span(q));
    return out;
}

Eigen::RowVectorXd FullModel::Bperp_at(const Eigen::VectorXd& q) const {
    Eigen::RowVectorXd out(n_);
    for (int i = 0; i < n_; ++i) out(i) = cBperp_[i](as_span(q));
    return out;
}

Eigen::VectorXd FullModel::h_at(const Eigen::VectorXd& q) const {
    Eigen::VectorXd out(n_ - 1);
    for (int i = 0; i < n_ - 1; ++i) out(i) = ch_[i](as_span(q));
    return out;
}

Eigen::MatrixXd FullModel::dh_at(const Eigen::VectorXd& q) const {
    Eigen::MatrixXd out(n_ - 1, n_);
    for (int i = 0; i < n_ - 1; ++i)
        for (int j = 0; j < n_; ++j) out(i, j) = cdh_[i * n_ + j](as_span(q));
    return out;
}

Eigen::VectorXd FullModel::coriolis_at(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
        double acc = 0;
        for (int j = 0; j < n_; ++j) {
            for (int k = 0; k < n_; ++k) {
                double gamma = 0.5 * (cdD_[(i * n_ + j) * n_ + k](as_span(q)) +
                                      cdD_[(i * n_ + k) * n_ + j](as_span(q)) -
                                      cdD_[(j * n_ + k) * n_ + i](as_span(q)));
                acc += gamma * qdot(j) * qdot(k);
            }
        }
        out(i) = acc;
    }
    return out;
}

Eigen::VectorXd FullModel::hess_h_quad(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) const {
    Eigen::VectorXd out(n_ - 1);
    for (int i = 0; i < n_ - 1; ++i) {
        double acc = 0;
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                acc += chess_[(i * n_ + j) * n_ + k](as_span(q)) * qdot(j) * qdot(k);
        out(i) = acc;
    }
    return out;
}

Eigen::VectorXd FullModel::sigma_at(double s) const {
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i) out(i) = csigma_[i](s);
    return out;
}

Eigen::VectorXd FullModel::sigma_p(double s) const {
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i) out(i) = csigma_p_[i](s);
    return out;
}

Eigen::VectorXd FullModel::sigma_pp(double s) const {
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i) out(i) = csigma_pp_[i](s);
    return out;
}

void validate_model(const FullModel& m, int grid) {
    const double span = m.sample_span();
    double min_det = std::numeric_limits<double>::infinity();
    double max_det = 0;
    for (int g = 0; g <= grid; ++g) {
        double s = span * g / grid;
        Eigen::VectorXd q = m.sigma_at(s);

        Eigen::MatrixXd D = m.D_at(q);
        if (!D.isApprox(D.transpose(), 1e-9))
            throw ModelError("D(q) is not symmetric along sigma");
        Eigen::LLT<Eigen::MatrixXd> llt(D);
        if (llt.info() != Eigen::Success)
            throw ModelError("D(q) is not positive definite along sigma");

        Eigen::RowVectorXd Bp = m.Bperp_at(q);
        Eigen::MatrixXd B = m.B_at(q);
        double ann = (Bp * B).cwiseAbs().maxCoeff();
        double scale = std::max(1.0, Bp.norm() * B.norm());
        if (ann > 1e-9 * scale)
            throw ModelError("Bperp(q) B(q) != 0 along sigma (left annihilator check failed)");
        if (Bp.norm() == 0) throw ModelError("Bperp vanishes along sigma");

        Eigen::VectorXd hv = m.h_at(q);
        if (hv.cwiseAbs().maxCoeff() > 1e-9)
            throw ModelError("h(sigma(s)) != 0: sigma does not parametrize h^{-1}(0)");

        if (m.sigma_p(s).norm() < 1e-12)
            throw ModelError("sigma'(s) = 0: parametrization is not regular");

        Eigen::MatrixXd A = decoupling_matrix(m, q);
        double det = std::fabs(A.determinant());
        min_det = std::min(min_det, det);
        max_det = std::max(max_det, det);
    }
    if (min_det <= 1e-9 * std::max(1.0, max_det))
        throw ModelError(
            "VHC is not regular: decoupling matrix A = dh D^{-1} B is singular along sigma");
}

Eigen::MatrixXd decoupling_matrix(const FullModel& m, const Eigen::VectorXd& q,
                                  double* cond_estimate) {
    Eigen::MatrixXd D = m.D_at(q);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(D);
    if (std::fabs(lu.determinant()) < 1e-300)
        throw NumericalError("D(q) numerically singular in decoupling matrix");
    Eigen::MatrixXd A = m.dh_at(q) * lu.solve(m.B_at(q));
    if (cond_estimate) {
        Eigen::PartialPivLU<Eigen::MatrixXd> alu(A);
        double da = std::fabs(alu.determinant());
        if (da < 1e-300) {
            *cond_estimate = std::numeric_limits<double>::infinity();
        } else {
            Eigen::MatrixXd Ainv = alu.inverse();
            *cond_estimate = A.cwiseAbs().rowwise().sum().maxCoeff() *
                             Ainv.cwiseAbs().rowwise().sum().maxCoeff();
        }
    }
    return A;
}

Eigen::VectorXd vhc_feedback(const FullModel& m, double k1, double k2, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& qdot) {
    if (!(k1 > 0) || !(k2 > 0)) throw ModelError("vhc_feedback requires k1, k2 > 0");
    Eigen::MatrixXd D = m.D_at(q);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(D);
    Eigen::VectorXd cg = m.coriolis_at(q, qdot) + m.gradP_at(q);
    Eigen::MatrixXd dh = m.dh_at(q);
    Eigen::VectorXd mu = -dh * lu.solve(cg) + m.hess_h_quad(q, qdot);
    Eigen::MatrixXd A = dh * lu.solve(m.B_at(q));
    Eigen::VectorXd e = m.h_at(q);
    Eigen::VectorXd edot = dh * qdot;
    Eigen::PartialPivLU<Eigen::MatrixXd> alu(A);
    if (std::fabs(alu.determinant()) < 1e-300)
        throw NumericalError("decoupling matrix A(q) singular in vhc_feedback");
    return alu.solve(-mu - k1 * e - k2 * edot);
}

FullTrajectory simulate_full(const FullModel& m, double k1, double k2, const Eigen::VectorXd& q0,
                             const Eigen::VectorXd& qdot0, double horizon, double rtol, double atol,
                             int samples) {
    const int n = m.n();
    FullTrajectory out;

    auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        Eigen::Map<const Eigen::VectorXd> q(y.data(), n), qd(y.data() + n, n);
        Eigen::VectorXd tau = vhc_feedback(m, k1, k2, q, qd);
        Eigen::VectorXd force = m.B_at(q) * tau - m.coriolis_at(q, qd) - m.gradP_at(q);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.D_at(q));
        Eigen::VectorXd qdd = lu.solve(force);
        for (int i = 0; i < n; ++i) {
            dy[static_cast<std::size_t>(i)] = qd(i);
            dy[static_cast<std::size_t>(n + i)] = qdd(i);
        }
    };

    std::vector<double> y(2 * n);
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = q0(i);
        y[static_cast<std::size_t>(n + i)] = qdot0(i);
    }

    auto record = [&](double t, std::span<const double> yv) {
        Eigen::Map<const Eigen::VectorXd> q(yv.data(), n), qd(yv.data() + n, n);
        out.t.push_back(t);
        out.q.push_back(q);
        out.qdot.push_back(qd);
        Eigen::VectorXd e = m.h_at(q);
        Eigen::VectorXd edot = m.dh_at(q) * qd;
        out.constraint_err.push_back(std::sqrt(e.squaredNorm() + edot.squaredNorm()));
    };

    record(0.0, y);
    const double dt = horizon / samples;
    std::vector<double> buf(2 * n);
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = atol;
    auto on_step = [&](const DenseStep& dense) {
        double last = out.t.back();
        while (last + dt <= dense.t1() + 1e-15) {
            double target = std::max(last + dt, dense.t0());
            dense.eval(target, buf);
            record(target, buf);
            last = target;
        }
        return true;
    };
    OdeStatus st = dopri5(rhs, std::span<double>(y), 0.0, horizon, opt, on_step);
    if (st == OdeStatus::Done && horizon - out.t.back() > 1e-12) record(horizon, y);
    out.termination = st == OdeStatus::Done ? "horizon" : "step_underflow";
    return out;
}

double project_to_s(const FullModel& m, const Eigen::VectorXd& q, int grid) {
    const double span = m.sample_span();
    double best_s = 0, best_d = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid; ++g) {
        double s = span * g / grid;
        double d = (q - m.sigma_at(s)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best_s = s;
        }
    }
    // Newton on g(s) = sigma'(s).(sigma(s) - q) = 0
    double s = best_s;
    for (int it = 0; it < 30; ++it) {
        Eigen::VectorXd r = m.sigma_at(s) - q;
        Eigen::VectorXd sp = m.sigma_p(s);
        double g1 = sp.dot(r);
        double g2 = m.sigma_pp(s).dot(r) + sp.squaredNorm();
        if (g2 == 0) break;
        double step = g1 / g2;
        s -= step;
        if (std::fabs(step) < 1e-14 * std::max(1.0, std::fabs(s))) break;
    }
    return s;
}

}  // namespace vhc
