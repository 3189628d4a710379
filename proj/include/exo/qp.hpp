#pragma once

#include <Eigen/Dense>

namespace exo {

/// minimize 0.5 * ||C x - d||^2  s.t.  A_eq x = b_eq,  D x <= f.
/// Reported objectives are ||C x - d||^2; duals refer to the 0.5-scaled Lagrangian.
struct QpProblem {
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd D;
  Eigen::VectorXd f;

  Eigen::Index n() const { return C.cols(); }
  void validate() const;  // throws std::invalid_argument on inconsistent shapes
};

enum class QpStatus { Optimal, MaxIter, Infeasible };
const char* to_string(QpStatus s);

struct QpDuals {
  Eigen::VectorXd eq;
  Eigen::VectorXd ineq;  // >= 0 at optimum
};

struct KktResiduals {
  double primal_eq = 0.0;    // ||A_eq x - b_eq||_inf
  double primal_ineq = 0.0;  // max violation of D x <= f
  double dual = 0.0;         // stationarity, inf-norm
  double comp_slack = 0.0;   // max |y_i (f_i - D_i x)|, plus any negative inequality dual
  double max() const;
};

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& x, const QpDuals& duals);
double objective(const QpProblem& p, const Eigen::VectorXd& x);

struct QpSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  double tol = 1e-8;
  int max_iter = 4000;
  int check_interval = 25;  // residual checks and rho adaptation
  double eq_rho_scale = 1e3;
  double infeasibility_tol = 1e-7;
  bool polish = true;
};

struct QpSolution {
  Eigen::VectorXd x;
  QpDuals duals;
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  bool polished = false;
  KktResiduals kkt;
  double objective = 0.0;
};

struct QpWarmStart {
  Eigen::VectorXd x, z, y;
  bool valid(Eigen::Index n, Eigen::Index m) const { return x.size() == n && z.size() == m && y.size() == m; }
};

/// Alternating-direction (OSQP-style) solver for small dense problems, with optional solution
/// polishing on the detected active set. Deterministic; one instance per thread.
class QpSolver {
 public:
  explicit QpSolver(QpSettings s = {}) : settings_(s) {}

  QpSolution solve(const QpProblem& p, const QpWarmStart* warm = nullptr);

  /// Iterate of the last call, usable as the next warm start.
  const QpWarmStart& last_iterate() const { return last_; }
  const QpSettings& settings() const { return settings_; }

 private:
  QpSettings settings_;
  QpWarmStart last_;
};

QpSolution solve(const QpProblem& p, const Eigen::VectorXd* warm_x = nullptr, const QpSettings& s = {});

}  // namespace exo
