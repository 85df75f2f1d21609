#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vhc/expr.hpp"
#include "vhc/reduced.hpp"

namespace vhc {

// An n-DOF Lagrangian control system D(q) qdd + C(q,qd) qd + grad P = B(q) tau
// with an order-(n-1) virtual holonomic constraint h(q) = 0 parametrized by
// q = sigma(s). All entries are expressions in q1..qn (sigma in s). The
// Coriolis term is built from Christoffel symbols of the first kind:
//   (C qd)_i = sum_jk 1/2 (dD_ij/dq_k + dD_ik/dq_j - dD_jk/dq_i) qd_j qd_k.
class FullModel {
public:
    FullModel(int n, std::vector<std::vector<ExprPtr>> D, ExprPtr P,
              std::vector<std::vector<ExprPtr>> B, std::vector<ExprPtr> Bperp,
              std::vector<ExprPtr> h, std::vector<ExprPtr> sigma, Topology topology,
              double period);

    int n() const { return n_; }
    Topology topology() const { return topology_; }
    double period() const { return period_; }
    // sample span of the parameter for grid checks: [0, period] on the
    // circle, [0, line_span] on the line
    double sample_span() const;
    void set_line_span(double s) { line_span_ = s; }

    // numeric evaluation at a configuration
    Eigen::MatrixXd D_at(const Eigen::VectorXd& q) const;
    Eigen::VectorXd gradP_at(const Eigen::VectorXd& q) const;
    Eigen::MatrixXd B_at(const Eigen::VectorXd& q) const;
    Eigen::RowVectorXd Bperp_at(const Eigen::VectorXd& q) const;
    Eigen::VectorXd h_at(const Eigen::VectorXd& q) const;
    Eigen::MatrixXd dh_at(const Eigen::VectorXd& q) const;          // (n-1) x n
    Eigen::VectorXd coriolis_at(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qdot) const;  // C(q,qd) qd
    Eigen::VectorXd hess_h_quad(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qdot) const;  // [qd' Hess(h_i) qd]_i

    Eigen::VectorXd sigma_at(double s) const;
    Eigen::VectorXd sigma_p(double s) const;
    Eigen::VectorXd sigma_pp(double s) const;

    // symbolic accessors used by reduce()
    const std::vector<std::vector<ExprPtr>>& D() const { return D_; }
    const ExprPtr& P() const { return P_; }
    const std::vector<std::vector<ExprPtr>>& B() const { return B_; }
    const std::vector<ExprPtr>& Bperp() const { return Bperp_; }
    const std::vector<ExprPtr>& h() const { return h_; }
    const std::vector<ExprPtr>& sigma() const { return sigma_; }
    const std::vector<std::string>& qvars() const { return qvars_; }
    const ExprPtr& dD(int i, int j, int k) const { return dD_[(i * n_ + j) * n_ + k]; }

private:
    int n_;
    Topology topology_;
    double period_;
    double line_span_ = 6.283185307179586;
    std::vector<std::string> qvars_;

    std::vector<std::vector<ExprPtr>> D_, B_;
    ExprPtr P_;
    std::vector<ExprPtr> Bperp_, h_, sigma_;
    std::vector<ExprPtr> dD_;      // dD[i][j]/dq_k flattened
    std::vector<ExprPtr> gradP_;   // dP/dq_i
    std::vector<ExprPtr> dh_;      // dh_i/dq_j flattened (n-1) x n
    std::vector<ExprPtr> hess_h_;  // d2h_i/dq_j dq_k flattened (n-1) x n x n
    std::vector<ExprPtr> sigma_p_, sigma_pp_;

    std::vector<CompiledExpr> cD_, cB_, cBperp_, ch_, cdh_, cgradP_, cdD_, chess_;
    std::vector<CompiledExpr> csigma_, csigma_p_, csigma_pp_;
};

// Grid validation of the model invariants: D symmetric positive definite
// along sigma, Bperp*B = 0 (1e-9 relative), h(sigma(s)) = 0 (1e-9),
// sigma'(s) != 0, and the decoupling matrix A = dh D^{-1} B invertible with
// |det A| bounded away from zero. Throws ModelError with a description.
void validate_model(const FullModel& model, int grid = 512);

// A(q) = dh_q D^{-1}(q) B(q); optionally reports a 1-norm condition estimate.
Eigen::MatrixXd decoupling_matrix(const FullModel& model, const Eigen::VectorXd& q,
                                  double* cond_estimate = nullptr);

// Input-output linearizing feedback tau = A^{-1} [-mu - k1 e - k2 edot],
// mu = -dh D^{-1}(C qd + grad P) + [qd' Hess(h_i) qd]_i.
Eigen::VectorXd vhc_feedback(const FullModel& model, double k1, double k2,
                             const Eigen::VectorXd& q, const Eigen::VectorXd& qdot);

struct FullTrajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> q, qdot;
    std::vector<double> constraint_err;  // ||(e, edot)||
    std::string termination;
};

FullTrajectory simulate_full(const FullModel& model, double k1, double k2,
                             const Eigen::VectorXd& q0, const Eigen::VectorXd& qdot0,
                             double horizon, double rtol = 1e-9, double atol = 1e-11,
                             int samples = 2048);

// Nearest-parameter projection onto sigma: grid scan then 1D Newton on
// d/ds |q - sigma(s)|^2 = 0.
double project_to_s(const FullModel& model, const Eigen::VectorXd& q, int grid = 512);

// Symbolic reduction to  sdd = Psi1(s) + Psi2(s) sd^2:
//   Psi1 = -(Bperp gradP)/(Bperp D sigma'),
//   Psi2 = -(Bperp D sigma'' + sum_i Bperp_i sigma'^T Q_i sigma')/(Bperp D sigma'),
// assembled as expression trees in s. Throws NumericalError if the
// denominator vanishes on the sample grid (singular reduction).
ReducedDynamics reduce(const FullModel& model);

}  // namespace vhc
