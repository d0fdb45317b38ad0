// ADMM solvers for QNOF-regularized recovery: matrix completion, robust
// PCA, and robust matrix completion.
//
// All three run on observations normalized by the leading singular value,
// so the default penalty schedule is data-independent; results are scaled
// back before returning. The penalty grows geometrically, beta_k = mu^k
// beta_0, capped to avoid overflow.
//
// The RMC sweep updates the coupled pair (P, Q) as one block before the
// (X, Z) block. Interleaving them (P, X, Z, Q) linearizes to an update map
// with a characteristic root below -1 on the observed set whenever mu < 2
// (and always once beta reaches its cap), which slowly blows up the tail
// iterations; the two-block sweep has no such mode.
#pragma once

#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnof/prox_l1l2.hpp"
#include "qnof/qsvd.hpp"
#include "qnof/quat_matrix.hpp"

namespace qnof {

struct SolverParams {
  double lambda = 1.0;   // QNOF weight
  double rho = 0.0;      // l1 weight; <= 0 selects 0.4 / sqrt(max(m, n))
  double beta0 = 1e-2;   // initial penalty (MC/RPCA; RMC default for both)
  double beta1_0 = 0.0;  // RMC penalty on X - P; <= 0 means beta0
  double beta2_0 = 0.0;  // RMC penalty on Z - Q; <= 0 means beta0
  double mu = 1.1;       // penalty growth, > 1
  int max_iters = 500;
  double stop_tol = 1e-9;    // 1e-4 is the usual choice for images
  double soft_eps = 1e-14;   // epsilon of the modulus shrinkage
  double beta_cap = 1e12;

  double resolve_rho(Eigen::Index m, Eigen::Index n) const {
    return rho > 0.0 ? rho : 0.4 / std::sqrt(double(std::max(m, n)));
  }
  void validate() const {
    if (lambda <= 0.0 || beta0 <= 0.0 || soft_eps <= 0.0 || stop_tol <= 0.0 ||
        max_iters < 1 || mu <= 1.0)
      throw std::invalid_argument("SolverParams: positivity/mu constraints");
  }
};

struct IterationStats {
  int k = 0;
  double rel_change_x = 0.0;  // ||X_k - X_{k-1}||_F / ||X_k||_F
  double dx = 0.0;            // successive differences, Frobenius
  double dz = 0.0;
  double dp = 0.0;            // RMC only (NaN otherwise)
  double dq = 0.0;
  double feas_x_p = 0.0;      // RMC: ||X - P||, ||Z - Q||
  double feas_z_q = 0.0;
  double feas_y_x_z = 0.0;    // MC / RPCA: ||Y - X - Z||
  double qnof_ratio = 0.0;    // ||X||_* / ||X||_F at the new iterate
  double z_l1 = 0.0;
  double eta_norm = 0.0;
  double xi_norm = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double prox_descent_slack = 0.0;  // old subproblem value minus new; >= 0
  double exactness = 0.0;  // MC: ||P_Om(Z)||; RMC: ||P_Om(P+Q-Y)||
};

/// Per-iteration diagnostics. All sequence values are reported on the
/// solver's working scale (observation normalized to unit spectral norm),
/// so tolerance checks against them are data-scale-free.
struct SolverTrace {
  std::vector<IterationStats> iters;
  bool has_pq = false;  // RMC traces carry P/Q feasibility
};

enum class Termination { kConverged, kMaxIters };

struct RecoveryResult {
  QuatMatrix x;  // low-rank estimate
  QuatMatrix z;  // sparse estimate (zero for MC)
  SolverTrace trace;
  Termination termination = Termination::kMaxIters;
  int iterations = 0;
  bool converged = false;
};

/// Entrywise modulus shrinkage that preserves the unit-quaternion
/// direction: z = m / (|m| + eps) * max(|m| - tau, 0).
inline QuatMatrix quat_soft_threshold(const QuatMatrix& m, double tau,
                                      double soft_eps) {
  if (tau < 0.0 || soft_eps <= 0.0)
    throw std::invalid_argument("quat_soft_threshold: bad tau/eps");
  const RealMatrix mod = entry_modulus(m);
  const RealMatrix scale =
      ((mod.array() - tau).max(0.0) / (mod.array() + soft_eps)).matrix();
  return {scale.cwiseProduct(m.w), scale.cwiseProduct(m.x),
          scale.cwiseProduct(m.y), scale.cwiseProduct(m.z)};
}

namespace detail {

inline double observation_scale(const QuatMatrix& y) {
  const Eigen::VectorXd sv = qsvd_values(y);
  return sv.size() > 0 ? sv(0) : 0.0;
}

// lambda_eff * qnof(sigma) + 0.5 * ||G - X||^2 given sigma(X) and the
// distance; used for the prox-descent diagnostic.
inline double x_subproblem_value(double lambda_eff,
                                 const Eigen::VectorXd& sigma_x,
                                 double dist_sq) {
  const double nrm = sigma_x.norm();
  const double ratio = nrm > 0.0 ? sigma_x.sum() / nrm : 0.0;
  return lambda_eff * ratio + 0.5 * dist_sq;
}

}  // namespace detail

/// QNOF matrix completion. Z carries the unobserved complement and is kept
/// exactly zero on Omega at every iteration.
inline RecoveryResult solve_mc(const QuatMatrix& y_in, const Mask& omega,
                               const SolverParams& params = {}) {
  params.validate();
  if (y_in.rows() != omega.rows() || y_in.cols() != omega.cols())
    throw std::invalid_argument("solve_mc: mask dimension mismatch");
  if (!omega.any()) throw std::invalid_argument("solve_mc: empty mask");

  const QuatMatrix y_obs = project_mask(y_in, omega, true);
  const double scale = detail::observation_scale(y_obs);
  if (scale <= 0.0)
    throw std::invalid_argument("solve_mc: zero observed block");
  const QuatMatrix y = y_obs * (1.0 / scale);
  const double y_fro = fro_norm(y);

  QuatMatrix x = y;
  QuatMatrix z(y.rows(), y.cols());
  QuatMatrix eta(y.rows(), y.cols());
  double beta = params.beta0;

  RecoveryResult res;
  res.trace.has_pq = false;
  Eigen::VectorXd sigma_prev;  // spectrum of the previous X iterate

  for (int k = 0; k < params.max_iters; ++k) {
    // Z-step: Z = Y - X + eta/beta off the mask, zero on it
    const QuatMatrix znew =
        project_mask(y - x + eta * (1.0 / beta), omega, false);

    // X-step: QNOF prox of Y - Z + eta/beta with weight lambda/beta
    const QuatMatrix g = y - znew + eta * (1.0 / beta);
    const double lambda_eff = params.lambda / beta;
    QuatMatrix xnew;
    Eigen::VectorXd sigma_x;
    if (fro_norm(g) == 0.0) {
      xnew = x;  // prox undefined at 0; keep the previous iterate
      sigma_x = sigma_prev;
    } else {
      xnew = qnof_prox_with_sigma(g, lambda_eff, sigma_x);
    }

    eta = eta + beta * (y - xnew - znew);

    IterationStats st;
    st.k = k;
    st.dx = fro_norm(xnew - x);
    st.dz = fro_norm(znew - z);
    st.dp = st.dq = std::numeric_limits<double>::quiet_NaN();
    st.rel_change_x = st.dx / std::max(fro_norm(xnew), 1e-300);
    st.feas_y_x_z = fro_norm(y - xnew - znew);
    st.feas_x_p = st.feas_z_q = std::numeric_limits<double>::quiet_NaN();
    const double nrm = sigma_x.size() ? sigma_x.norm() : 0.0;
    st.qnof_ratio = nrm > 0.0 ? sigma_x.sum() / nrm : 0.0;
    st.z_l1 = norms(znew).l1;
    st.eta_norm = fro_norm(eta);
    st.beta1 = st.beta2 = beta;
    st.exactness = fro_norm(project_mask(znew, omega, true));
    if (sigma_prev.size() > 0 && fro_norm(g) > 0.0) {
      st.prox_descent_slack =
          detail::x_subproblem_value(lambda_eff, sigma_prev,
                                     fro_norm(g - x) * fro_norm(g - x)) -
          detail::x_subproblem_value(lambda_eff, sigma_x,
                                     fro_norm(g - xnew) * fro_norm(g - xnew));
    }
    res.trace.iters.push_back(st);

    x = xnew;
    z = znew;
    sigma_prev = sigma_x;
    beta = std::min(beta * params.mu, params.beta_cap);
    res.iterations = k + 1;

    if (st.rel_change_x < params.stop_tol &&
        st.feas_y_x_z / std::max(1.0, y_fro) < params.stop_tol) {
      res.converged = true;
      break;
    }
  }
  res.termination = res.converged ? Termination::kConverged : Termination::kMaxIters;
  res.x = x * scale;
  res.z = QuatMatrix::zero(y.rows(), y.cols());  // MC has no sparse estimate
  return res;
}

/// QNOF robust PCA: Y = X + Z with sparse Z, full observation.
inline RecoveryResult solve_rpca(const QuatMatrix& y_in,
                                 const SolverParams& params = {}) {
  params.validate();
  const double scale = detail::observation_scale(y_in);
  if (scale <= 0.0) throw std::invalid_argument("solve_rpca: zero input");
  const QuatMatrix y = y_in * (1.0 / scale);
  const double y_fro = fro_norm(y);
  const double rho = params.resolve_rho(y.rows(), y.cols());

  QuatMatrix x = y;
  QuatMatrix z(y.rows(), y.cols());
  QuatMatrix eta(y.rows(), y.cols());
  double beta = params.beta0;

  RecoveryResult res;
  res.trace.has_pq = false;
  Eigen::VectorXd sigma_prev;

  for (int k = 0; k < params.max_iters; ++k) {
    const QuatMatrix znew = quat_soft_threshold(y - x + eta * (1.0 / beta),
                                                rho / beta, params.soft_eps);

    const QuatMatrix g = y - znew + eta * (1.0 / beta);
    const double lambda_eff = params.lambda / beta;
    QuatMatrix xnew;
    Eigen::VectorXd sigma_x;
    if (fro_norm(g) == 0.0) {
      xnew = x;
      sigma_x = sigma_prev;
    } else {
      xnew = qnof_prox_with_sigma(g, lambda_eff, sigma_x);
    }

    eta = eta + beta * (y - xnew - znew);

    IterationStats st;
    st.k = k;
    st.dx = fro_norm(xnew - x);
    st.dz = fro_norm(znew - z);
    st.dp = st.dq = std::numeric_limits<double>::quiet_NaN();
    st.rel_change_x = st.dx / std::max(fro_norm(xnew), 1e-300);
    st.feas_y_x_z = fro_norm(y - xnew - znew);
    st.feas_x_p = st.feas_z_q = std::numeric_limits<double>::quiet_NaN();
    const double nrm = sigma_x.size() ? sigma_x.norm() : 0.0;
    st.qnof_ratio = nrm > 0.0 ? sigma_x.sum() / nrm : 0.0;
    st.z_l1 = norms(znew).l1;
    st.eta_norm = fro_norm(eta);
    st.beta1 = st.beta2 = beta;
    res.trace.iters.push_back(st);

    x = xnew;
    z = znew;
    sigma_prev = sigma_x;
    beta = std::min(beta * params.mu, params.beta_cap);
    res.iterations = k + 1;

    if (st.rel_change_x < params.stop_tol &&
        st.feas_y_x_z / std::max(1.0, y_fro) < params.stop_tol) {
      res.converged = true;
      break;
    }
  }
  res.termination = res.converged ? Termination::kConverged : Termination::kMaxIters;
  res.x = x * scale;
  res.z = z * scale;
  return res;
}

/// QNOF robust matrix completion with auxiliary splits P (low-rank side)
/// and Q (sparse side), coupled through P_Omega(P + Q) = P_Omega(Y).
inline RecoveryResult solve_rmc(const QuatMatrix& y_in, const Mask& omega,
                                const SolverParams& params = {}) {
  params.validate();
  if (y_in.rows() != omega.rows() || y_in.cols() != omega.cols())
    throw std::invalid_argument("solve_rmc: mask dimension mismatch");
  if (!omega.any()) throw std::invalid_argument("solve_rmc: empty mask");

  const QuatMatrix y_obs = project_mask(y_in, omega, true);
  const double scale = detail::observation_scale(y_obs);
  if (scale <= 0.0)
    throw std::invalid_argument("solve_rmc: zero observed block");
  const QuatMatrix y = y_obs * (1.0 / scale);
  const double y_fro = fro_norm(y);
  const double rho = params.resolve_rho(y.rows(), y.cols());

  const Eigen::Index m = y.rows(), n = y.cols();
  QuatMatrix x = y;
  QuatMatrix z(m, n), eta(m, n), xi(m, n), p_prev(m, n), q_prev(m, n);
  double beta1 = params.beta1_0 > 0.0 ? params.beta1_0 : params.beta0;
  double beta2 = params.beta2_0 > 0.0 ? params.beta2_0 : params.beta0;

  RecoveryResult res;
  res.trace.has_pq = true;
  Eigen::VectorXd sigma_prev;
  bool have_pq_prev = false;

  for (int k = 0; k < params.max_iters; ++k) {
    // (P, Q) block. Off the mask each side tracks its own variable; on
    // the mask the pair solves the coupled quadratic, which is the
    // beta-weighted average (the symmetric average when beta1 = beta2).
    const QuatMatrix a_side = x + eta * (1.0 / beta1);
    const QuatMatrix b_side = z + xi * (1.0 / beta2);
    const double w1 = beta1 / (beta1 + beta2);
    QuatMatrix p = a_side;
    {
      const QuatMatrix correction = y - a_side - b_side;
      const QuatMatrix p_on = a_side + correction * (1.0 - w1);
      p.w = omega.select(p_on.w, a_side.w);
      p.x = omega.select(p_on.x, a_side.x);
      p.y = omega.select(p_on.y, a_side.y);
      p.z = omega.select(p_on.z, a_side.z);
    }
    QuatMatrix q = b_side;
    {
      const QuatMatrix q_on = y - p;  // exact constraint on the mask
      q.w = omega.select(q_on.w, b_side.w);
      q.x = omega.select(q_on.x, b_side.x);
      q.y = omega.select(q_on.y, b_side.y);
      q.z = omega.select(q_on.z, b_side.z);
    }

    // X-step: QNOF prox of P - eta/beta1 at weight lambda/beta1
    const QuatMatrix g = p - eta * (1.0 / beta1);
    const double lambda_eff = params.lambda / beta1;
    QuatMatrix xnew;
    Eigen::VectorXd sigma_x;
    if (fro_norm(g) == 0.0) {
      xnew = x;
      sigma_x = sigma_prev;
    } else {
      xnew = qnof_prox_with_sigma(g, lambda_eff, sigma_x);
    }

    // Z-step: modulus shrinkage of Q - xi/beta2 at rho/beta2
    const QuatMatrix znew = quat_soft_threshold(q - xi * (1.0 / beta2),
                                                rho / beta2, params.soft_eps);

    eta = eta + beta1 * (xnew - p);
    xi = xi + beta2 * (znew - q);

    IterationStats st;
    st.k = k;
    st.dx = fro_norm(xnew - x);
    st.dz = fro_norm(znew - z);
    st.dp = have_pq_prev ? fro_norm(p - p_prev)
                         : std::numeric_limits<double>::quiet_NaN();
    st.dq = have_pq_prev ? fro_norm(q - q_prev)
                         : std::numeric_limits<double>::quiet_NaN();
    st.rel_change_x = st.dx / std::max(fro_norm(xnew), 1e-300);
    st.feas_x_p = fro_norm(xnew - p);
    st.feas_z_q = fro_norm(znew - q);
    st.feas_y_x_z = std::numeric_limits<double>::quiet_NaN();
    const double nrm = sigma_x.size() ? sigma_x.norm() : 0.0;
    st.qnof_ratio = nrm > 0.0 ? sigma_x.sum() / nrm : 0.0;
    st.z_l1 = norms(znew).l1;
    st.eta_norm = fro_norm(eta);
    st.xi_norm = fro_norm(xi);
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.exactness = fro_norm(project_mask(p + q - y, omega, true));
    if (sigma_prev.size() > 0 && fro_norm(g) > 0.0) {
      st.prox_descent_slack =
          detail::x_subproblem_value(lambda_eff, sigma_prev,
                                     fro_norm(g - x) * fro_norm(g - x)) -
          detail::x_subproblem_value(lambda_eff, sigma_x,
                                     fro_norm(g - xnew) * fro_norm(g - xnew));
    }
    res.trace.iters.push_back(st);

    x = xnew;
    z = znew;
    p_prev = p;
    q_prev = q;
    have_pq_prev = true;
    sigma_prev = sigma_x;
    beta1 = std::min(beta1 * params.mu, params.beta_cap);
    beta2 = std::min(beta2 * params.mu, params.beta_cap);
    res.iterations = k + 1;

    const double feas = std::max(st.feas_x_p, st.feas_z_q);
    if (st.rel_change_x < params.stop_tol &&
        feas / std::max(1.0, y_fro) < params.stop_tol) {
      res.converged = true;
      break;
    }
  }
  res.termination = res.converged ? Termination::kConverged : Termination::kMaxIters;
  res.x = x * scale;
  res.z = z * scale;
  return res;
}

struct ConvergenceReport {
  bool sufficient_data = false;
  bool dx_ok = false, dz_ok = false, dp_ok = false, dq_ok = false;
  bool feas_xp_ok = false, feas_zq_ok = false;
  bool all_ok() const {
    return sufficient_data && dx_ok && dz_ok && dp_ok && dq_ok && feas_xp_ok &&
           feas_zq_ok;
  }
};

/// Checks the six convergence limits (successive differences of X, Z, P, Q
/// and the two feasibility gaps) over the final `window` iterations. The
/// sequences are compared to tol on the scale of the final iterate norms.
inline ConvergenceReport check_convergence_limits(const SolverTrace& trace,
                                                  double tol,
                                                  int window = 5) {
  ConvergenceReport rep;
  const auto& it = trace.iters;
  if (std::ssize(it) < window + 1) return rep;  // insufficient data
  rep.sufficient_data = true;
  rep.dx_ok = rep.dz_ok = rep.dp_ok = rep.dq_ok = true;
  rep.feas_xp_ok = rep.feas_zq_ok = true;
  auto below = [&](double v) { return std::isnan(v) || v <= tol; };
  for (std::size_t i = it.size() - static_cast<std::size_t>(window);
       i < it.size(); ++i) {
    rep.dx_ok &= below(it[i].dx);
    rep.dz_ok &= below(it[i].dz);
    rep.dp_ok &= below(it[i].dp);
    rep.dq_ok &= below(it[i].dq);
    if (trace.has_pq) {
      rep.feas_xp_ok &= below(it[i].feas_x_p);
      rep.feas_zq_ok &= below(it[i].feas_z_q);
    } else {
      rep.feas_xp_ok &= below(it[i].feas_y_x_z);
    }
  }
  return rep;
}

}  // namespace qnof
