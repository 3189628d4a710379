#include "exo/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace exo {

void QpProblem::validate() const {
  const Eigen::Index nv = C.cols();
  if (nv == 0) throw std::invalid_argument("QP has no variables");
  if (d.size() != C.rows()) throw std::invalid_argument("objective target size mismatch");
  if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != nv))
    throw std::invalid_argument("equality constraint size mismatch");
  if (D.rows() != f.size() || (D.rows() > 0 && D.cols() != nv))
    throw std::invalid_argument("inequality constraint size mismatch");
}

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::MaxIter: return "max_iter";
    case QpStatus::Infeasible: return "infeasible";
  }
  return "?";
}

double KktResiduals::max() const { return std::max({primal_eq, primal_ineq, dual, comp_slack}); }

double objective(const QpProblem& p, const Eigen::VectorXd& x) { return (p.C * x - p.d).squaredNorm(); }

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

Eigen::MatrixXd stacked(const QpProblem& p) {
  Eigen::MatrixXd A(p.A_eq.rows() + p.D.rows(), p.n());
  if (p.A_eq.rows()) A.topRows(p.A_eq.rows()) = p.A_eq;
  if (p.D.rows()) A.bottomRows(p.D.rows()) = p.D;
  return A;
}

}  // namespace

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& x, const QpDuals& y) {
  KktResiduals r;
  if (p.A_eq.rows()) r.primal_eq = inf_norm(p.A_eq * x - p.b_eq);
  Eigen::VectorXd grad = p.C.transpose() * (p.C * x - p.d);
  if (p.A_eq.rows()) grad += p.A_eq.transpose() * y.eq;
  if (p.D.rows()) {
    const Eigen::VectorXd slack = p.f - p.D * x;
    r.primal_ineq = std::max(0.0, -slack.minCoeff());
    grad += p.D.transpose() * y.ineq;
    double cs = 0.0;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      cs = std::max(cs, std::abs(y.ineq(i) * slack(i)));
      cs = std::max(cs, -y.ineq(i));
    }
    r.comp_slack = cs;
  }
  r.dual = inf_norm(grad);
  return r;
}

namespace {

// Solve the equality-constrained problem on the working set; returns false if singular.
bool polish_on(const QpProblem& p, const std::vector<Eigen::Index>& act, Eigen::VectorXd& x, QpDuals& y) {
  const Eigen::Index n = p.n();
  const Eigen::Index me = p.A_eq.rows();
  const Eigen::Index k = me + static_cast<Eigen::Index>(act.size());
  Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(n + k, n + k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
  KKT.topLeftCorner(n, n) = p.C.transpose() * p.C;
  rhs.head(n) = p.C.transpose() * p.d;
  if (me) {
    KKT.block(n, 0, me, n) = p.A_eq;
    KKT.block(0, n, n, me) = p.A_eq.transpose();
    rhs.segment(n, me) = p.b_eq;
  }
  for (std::size_t j = 0; j < act.size(); ++j) {
    const Eigen::Index r = n + me + static_cast<Eigen::Index>(j);
    KKT.block(r, 0, 1, n) = p.D.row(act[j]);
    KKT.block(0, r, n, 1) = p.D.row(act[j]).transpose();
    rhs(r) = p.f(act[j]);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(KKT);
  if (cod.rank() < n) return false;
  Eigen::VectorXd sol = cod.solve(rhs);
  for (int it = 0; it < 3; ++it) sol += cod.solve(rhs - KKT * sol);
  if (!sol.allFinite()) return false;
  x = sol.head(n);
  y.eq = sol.segment(n, me);
  y.ineq = Eigen::VectorXd::Zero(p.D.rows());
  for (std::size_t j = 0; j < act.size(); ++j) y.ineq(act[j]) = sol(n + me + static_cast<Eigen::Index>(j));
  return true;
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p, const QpWarmStart* warm) {
  p.validate();
  const QpSettings& s = settings_;
  const Eigen::Index n = p.n();
  const Eigen::Index me = p.A_eq.rows();
  const Eigen::Index mi = p.D.rows();
  const Eigen::Index m = me + mi;
  const double inf = std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd P = p.C.transpose() * p.C;
  const Eigen::VectorXd q = -p.C.transpose() * p.d;
  const Eigen::MatrixXd A = stacked(p);
  Eigen::VectorXd l(m), u(m);
  if (me) {
    l.head(me) = p.b_eq;
    u.head(me) = p.b_eq;
  }
  if (mi) {
    l.tail(mi).setConstant(-inf);
    u.tail(mi) = p.f;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), z = Eigen::VectorXd::Zero(m), y = Eigen::VectorXd::Zero(m);
  if (warm && warm->valid(n, m)) {
    x = warm->x;
    z = warm->z;
    y = warm->y;
  } else if (warm && warm->x.size() == n) {
    x = warm->x;
    z = (A * x).cwiseMax(l).cwiseMin(u);
  }

  double rho = s.rho;
  Eigen::VectorXd R(m);
  auto set_rho = [&](double r) {
    rho = r;
    for (Eigen::Index i = 0; i < m; ++i) R(i) = i < me ? r * s.eq_rho_scale : r;
  };
  set_rho(rho);
  Eigen::LLT<Eigen::MatrixXd> llt;
  auto factor = [&]() {
    Eigen::MatrixXd K = P + s.sigma * Eigen::MatrixXd::Identity(n, n);
    if (m) K.noalias() += A.transpose() * R.asDiagonal() * A;
    llt.compute(K);
  };
  factor();

  QpSolution sol;
  sol.status = QpStatus::MaxIter;
  Eigen::VectorXd xt(n), zt(m), zprev(m), yprev(m), Ax(m), Px(n), Aty(n);
  bool converged = false;
  int it = 0;
  const double eps = s.tol;
  for (it = 1; it <= s.max_iter; ++it) {
    yprev = y;
    zprev = z;
    Eigen::VectorXd rhs = s.sigma * x - q;
    if (m) rhs.noalias() += A.transpose() * (R.cwiseProduct(z) - y);
    xt = llt.solve(rhs);
    zt = A * xt;
    x = s.relaxation * xt + (1.0 - s.relaxation) * x;
    const Eigen::VectorXd zh = s.relaxation * zt + (1.0 - s.relaxation) * zprev;
    z = (zh + y.cwiseQuotient(R)).cwiseMax(l).cwiseMin(u);
    y += R.cwiseProduct(zh - z);

    if (it % s.check_interval != 0 && it != s.max_iter) continue;
    Ax = A * x;
    Px = P * x;
    Aty = m ? Eigen::VectorXd(A.transpose() * y) : Eigen::VectorXd::Zero(n);
    const double rp = m ? inf_norm(Ax - z) : 0.0;
    const double rd = inf_norm(Px + q + Aty);
    const double sp = std::max(inf_norm(Ax), inf_norm(z));
    const double sd = std::max({inf_norm(Px), inf_norm(Aty), inf_norm(q)});
    if (rp <= eps + eps * sp && rd <= eps + eps * sd) {
      converged = true;
      break;
    }
    // Primal infeasibility certificate from the dual increment.
    const Eigen::VectorXd dy = y - yprev;
    const double ndy = inf_norm(dy);
    if (m && ndy > 1e-12) {
      const double t = s.infeasibility_tol * ndy;
      bool ok = inf_norm(A.transpose() * dy) <= t;
      double support = 0.0;
      for (Eigen::Index i = 0; i < m && ok; ++i) {
        if (dy(i) > 0.0) {
          if (std::isinf(u(i))) ok = dy(i) <= t;
          else support += u(i) * dy(i);
        } else if (dy(i) < 0.0) {
          if (std::isinf(l(i))) ok = -dy(i) <= t;
          else support += l(i) * dy(i);
        }
      }
      if (ok && support < -t) {
        sol.status = QpStatus::Infeasible;
        break;
      }
    }
    const double ratio = std::sqrt((rp / (sp + 1e-30)) / (rd / (sd + 1e-30) + 1e-30));
    const double rho_new = std::clamp(rho * ratio, 1e-6, 1e6);
    if (std::isfinite(rho_new) && (rho_new > 5.0 * rho || rho_new < 0.2 * rho)) {
      set_rho(rho_new);
      factor();
    }
  }
  sol.iterations = std::min(it, s.max_iter);
  last_.x = x;
  last_.z = z;
  last_.y = y;

  sol.x = x;
  sol.duals.eq = y.head(me);
  sol.duals.ineq = y.tail(mi).cwiseMax(0.0);
  sol.kkt = kkt_residuals(p, sol.x, sol.duals);
  if (sol.status != QpStatus::Infeasible) {
    if (s.polish) {
      std::vector<Eigen::Index> act;
      for (Eigen::Index i = 0; i < mi; ++i)
        if (u(me + i) - z(me + i) < y(me + i)) act.push_back(i);
      Eigen::VectorXd xp;
      QpDuals yp;
      if (polish_on(p, act, xp, yp)) {
        const KktResiduals kp = kkt_residuals(p, xp, yp);
        if (kp.max() <= sol.kkt.max() || kp.max() <= eps) {
          sol.x = xp;
          sol.duals = yp;
          sol.kkt = kp;
          sol.polished = true;
        }
      }
    }
    if (converged || sol.kkt.max() <= eps) sol.status = QpStatus::Optimal;
    if (sol.status == QpStatus::Optimal && sol.kkt.primal_ineq > std::max(eps, 1e-6)) sol.status = QpStatus::MaxIter;
  }
  sol.objective = objective(p, sol.x);
  return sol;
}

QpSolution solve(const QpProblem& p, const Eigen::VectorXd* warm_x, const QpSettings& s) {
  QpSolver solver(s);
  if (!warm_x) return solver.solve(p);
  QpWarmStart w;
  w.x = *warm_x;
  return solver.solve(p, &w);
}

}  // namespace exo
