#pragma once

#include <chrono>

#include "prodgraph/covariance.hpp"
#include "prodgraph/product.hpp"
#include "prodgraph/solver_detail.hpp"
#include "prodgraph/solver_options.hpp"

namespace prodgraph {

namespace detail {

inline double dr_gamma(long n) {
  return 0.25 / static_cast<double>(std::max<long>(2, n));
}

inline void check_solver_input(const Matrix& c, const SolverOptions& opts) {
  if (c.rows() != c.cols() || c.rows() < 2)
    throw Error(Errc::dimension_mismatch,
                "covariance must be square with at least two rows");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw Error(Errc::asymmetric_matrix, "covariance is not symmetric");
  if (!(opts.epsilon >= 0.0) || !std::isfinite(opts.epsilon))
    throw Error(Errc::invalid_argument, "epsilon must be finite and >= 0");
  if (opts.norm_mode == NormMode::binary_unnormalized)
    throw Error(Errc::invalid_argument,
                "solver normalization must be first-row-unit or row-stochastic");
  if (!(opts.tol > 0.0) || opts.max_iter < 1 || opts.alt_max_rounds < 1 ||
      !(opts.alt_rel_change > 0.0) || !(opts.beta > 0.0))
    throw Error(Errc::invalid_argument, "bad solver options");
}

inline SolveStatus worst_status(SolveStatus a, SolveStatus b) {
  auto rank = [](SolveStatus s) {
    switch (s) {
      case SolveStatus::optimal: return 0;
      case SolveStatus::max_iter: return 1;
      case SolveStatus::infeasible: return 2;
    }
    return 2;
  };
  return rank(a) >= rank(b) ? a : b;
}

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// min ||S||_1 over the shift-operator set subject to ||CS - SC||_F <= eps.
// The problem is solved on C/||C||_F with the radius scaled alongside, which
// makes the estimate exactly invariant to rescaling (C, eps) -> (aC, a eps).
inline SolveReport solve_l1_commute(const Matrix& c, const SolverOptions& opts) {
  detail::check_solver_input(c, opts);
  detail::WallTimer timer;
  const long n = c.rows();
  const double s = c.norm();
  const double eps_eff =
      opts.epsilon_relative ? opts.epsilon * s : opts.epsilon;
  Matrix cn = c;
  double eps_n = 0.0;
  if (s > 0.0) {
    cn /= s;
    eps_n = eps_eff / s;
  }
  detail::SpectralBall ball(cn, eps_n);
  detail::DrOutcome dr =
      detail::dr_solve(n, opts.norm_mode, ball, detail::dr_gamma(n), opts.tol,
                       opts.max_iter);
  SolveReport rep;
  rep.options = opts;
  rep.status = dr.status;
  rep.iterations = dr.iterations;
  rep.s_full = Gso{n, dr.x, opts.norm_mode};
  rep.objective = dr.x.sum();
  rep.commut_residual = (c * dr.x - dr.x * c).norm();
  rep.wall_time_s = timer.seconds();
  return rep;
}

inline SolveReport solve_st(const Matrix& c_y, const SolverOptions& opts) {
  return solve_l1_commute(c_y, opts);
}

// Two independent factor solves against the dimension-wise covariances. The
// reported commutator residual stacks both factor residuals.
inline SolveReport solve_sepkst(const Matrix& c_p, const Matrix& c_q,
                                const SolverOptions& opts) {
  SolveReport rp = solve_l1_commute(c_p, opts);
  SolveReport rq = solve_l1_commute(c_q, opts);
  SolveReport rep;
  rep.options = opts;
  rep.s_p = rp.s_full;
  rep.s_q = rq.s_full;
  rep.objective = rp.objective + opts.beta * rq.objective;
  rep.commut_residual =
      std::sqrt(rp.commut_residual * rp.commut_residual +
                rq.commut_residual * rq.commut_residual);
  rep.iterations = rp.iterations + rq.iterations;
  rep.wall_time_s = rp.wall_time_s + rq.wall_time_s;
  rep.status_p = rp.status;
  rep.status_q = rq.status;
  rep.status = detail::worst_status(rp.status, rq.status);
  return rep;
}

namespace detail {
// One factor subproblem of the Kronecker-constrained program: the other
// factor is held fixed inside the commutator.
inline DrOutcome solve_kst_factor(const Matrix& cn, long P, long Q,
                                  const Matrix& fixed_other, bool solving_p,
                                  double eps_n, double gamma_pull,
                                  const SolverOptions& opts) {
  const long n = solving_p ? P : Q;
  auto apply = [&](const Matrix& b) -> Matrix {
    Matrix k = solving_p ? kron(fixed_other, b) : kron(b, fixed_other);
    Matrix out = cn * k;
    out.noalias() -= k * cn;
    return out;
  };
  GramBall ball(n, apply, eps_n);
  return dr_solve(n, opts.norm_mode, ball, gamma_pull, opts.tol,
                  opts.max_iter);
}
}  // namespace detail

// Alternating factor estimation under the Kronecker product constraint.
// Warm starts come from the dimension-wise solves on the partial traces of
// C_y; each factor's initial radius scales the global radius by that partial
// trace's share of the joint norm.
inline SolveReport solve_kst(const Matrix& c_y, long P, long Q,
                             const SolverOptions& opts) {
  detail::check_solver_input(c_y, opts);
  if (P < 2 || Q < 2 || c_y.rows() != P * Q)
    throw Error(Errc::dimension_mismatch,
                "joint covariance must be (P*Q) x (P*Q) with P, Q >= 2");
  detail::WallTimer timer;
  const double s = c_y.norm();
  const double eps_eff =
      opts.epsilon_relative ? opts.epsilon * s : opts.epsilon;
  Matrix cn = c_y;
  double eps_n = 0.0;
  if (s > 0.0) {
    cn /= s;
    eps_n = eps_eff / s;
  }

  SolveReport rep;
  rep.options = opts;
  long total_iters = 0;

  auto uniform_init = [](long n) {
    Matrix u = Matrix::Constant(n, n, 1.0 / static_cast<double>(n - 1));
    u.diagonal().setZero();
    return u;
  };
  auto warm = [&](const Matrix& pt, long n) -> Matrix {
    SolverOptions w = opts;
    w.epsilon = eps_n * pt.norm();
    w.epsilon_relative = false;
    SolveReport r = solve_l1_commute(pt, w);
    total_iters += r.iterations;
    if (r.status == SolveStatus::optimal) return r.s_full->weights;
    return uniform_init(n);
  };
  const Matrix pt_p = partial_trace_q(cn, P, Q);
  const Matrix pt_q = partial_trace_p(cn, P, Q);
  Matrix sp = warm(pt_p, P);
  Matrix sq = warm(pt_q, Q);

  // A positive radius absorbs the fixed factor's own solve noise. At radius
  // zero the subproblem demands exact commutation, and the noncommuting
  // component of the fixed factor (order tol, left by its solve) would
  // collapse the constraint nullspace, so the operator is built from the
  // factor projected onto the commutant of its marginal.
  const double eps_sub = eps_n;
  std::optional<detail::SpectralBall> comm_p, comm_q;
  if (eps_n == 0.0) {
    comm_p.emplace(pt_p, 0.0);
    comm_q.emplace(pt_q, 0.0);
  }
  auto fixed = [](const Matrix& f,
                  const std::optional<detail::SpectralBall>& comm) {
    Matrix g = f;
    if (comm) comm->project(g);
    return g;
  };

  SolveStatus agg = SolveStatus::optimal;
  long rounds = 0;
  for (long r = 1; r <= opts.alt_max_rounds; ++r) {
    rounds = r;
    detail::DrOutcome dp = detail::solve_kst_factor(
        cn, P, Q, fixed(sq, comm_q), /*solving_p=*/true, eps_sub,
        detail::dr_gamma(P), opts);
    total_iters += dp.iterations;
    agg = detail::worst_status(agg, dp.status);
    if (dp.status == SolveStatus::infeasible) {
      sp = dp.x;
      break;
    }
    detail::DrOutcome dq = detail::solve_kst_factor(
        cn, P, Q, fixed(dp.x, comm_p), /*solving_p=*/false, eps_sub,
        detail::dr_gamma(Q) * opts.beta, opts);
    total_iters += dq.iterations;
    agg = detail::worst_status(agg, dq.status);
    const double change_p =
        (dp.x - sp).norm() / std::max(1e-12, sp.norm());
    const double change_q =
        (dq.x - sq).norm() / std::max(1e-12, sq.norm());
    sp = dp.x;
    sq = dq.x;
    if (dq.status == SolveStatus::infeasible) break;
    if (std::max(change_p, change_q) < opts.alt_rel_change) break;
  }

  rep.s_p = Gso{P, sp, opts.norm_mode};
  rep.s_q = Gso{Q, sq, opts.norm_mode};
  rep.objective = sp.sum() + opts.beta * sq.sum();
  Matrix k = kron(sq, sp);
  rep.commut_residual = (c_y * k - k * c_y).norm();
  rep.iterations = total_iters;
  rep.alt_rounds = rounds;
  rep.status = agg;
  rep.wall_time_s = timer.seconds();
  return rep;
}

}  // namespace prodgraph
