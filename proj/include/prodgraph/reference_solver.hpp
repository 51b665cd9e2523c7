#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "prodgraph/solver.hpp"

namespace prodgraph {
namespace refdetail {

// Independent small-instance oracle for the l1 / commutator-ball program.
// Nothing here is shared with the splitting solver: the problem is posed in
// upper-triangle pair coordinates and solved by a two-phase dense simplex
// (zero radius) or a penalty path of barrier-centered quadratic programs
// (positive radius), both in long double.

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct SimplexOut {
  bool feasible = false;
  LVec x;
  long double obj = 0;
  long pivots = 0;
};

// min c^T x  s.t.  E x = f, x >= 0.  Bland's rule, so termination is
// guaranteed; row scaling up front, artificials driven out after phase 1.
inline SimplexOut simplex_min(const LMat& e_in, const LVec& f_in,
                              const LVec& c) {
  const long nvar = e_in.cols();
  constexpr long double kPivTol = 1e-11L;
  constexpr long double kRcTol = 1e-12L;

  std::vector<std::vector<long double>> rows;
  std::vector<long double> rhs;
  for (long i = 0; i < e_in.rows(); ++i) {
    long double s = 0;
    for (long j = 0; j < nvar; ++j) s = std::max(s, std::abs(e_in(i, j)));
    if (s < 1e-14L) {
      if (std::abs(f_in(i)) > 1e-12L) return {};
      continue;
    }
    std::vector<long double> r(static_cast<std::size_t>(nvar));
    long double rv = f_in(i) / s;
    for (long j = 0; j < nvar; ++j) r[static_cast<std::size_t>(j)] = e_in(i, j) / s;
    if (rv < 0) {
      rv = -rv;
      for (auto& v : r) v = -v;
    }
    rows.push_back(std::move(r));
    rhs.push_back(rv);
  }
  long m = static_cast<long>(rows.size());
  // tableau columns: nvar structural, m artificial, then rhs
  std::vector<std::vector<long double>> t(static_cast<std::size_t>(m));
  std::vector<long> basis(static_cast<std::size_t>(m));
  for (long r = 0; r < m; ++r) {
    auto& row = t[static_cast<std::size_t>(r)];
    row.assign(static_cast<std::size_t>(nvar + m + 1), 0.0L);
    for (long j = 0; j < nvar; ++j)
      row[static_cast<std::size_t>(j)] = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
    row[static_cast<std::size_t>(nvar + r)] = 1.0L;
    row[static_cast<std::size_t>(nvar + m)] = rhs[static_cast<std::size_t>(r)];
    basis[static_cast<std::size_t>(r)] = nvar + r;
  }
  long pivots = 0;
  auto pivot_at = [&](long leave, long enter) {
    auto& prow = t[static_cast<std::size_t>(leave)];
    const long double pv = prow[static_cast<std::size_t>(enter)];
    for (auto& v : prow) v /= pv;
    for (long r = 0; r < m; ++r) {
      if (r == leave) continue;
      auto& row = t[static_cast<std::size_t>(r)];
      const long double factor = row[static_cast<std::size_t>(enter)];
      if (factor == 0.0L) continue;
      for (std::size_t jj = 0; jj < row.size(); ++jj)
        row[jj] -= factor * prow[jj];
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++pivots;
  };
  auto run = [&](const std::vector<long double>& cost, bool allow_art) -> bool {
    for (;;) {
      if (pivots > 200000) return false;
      long enter = -1;
      const long ncol = allow_art ? nvar + m : nvar;
      for (long j = 0; j < ncol; ++j) {
        bool inb = false;
        for (long r = 0; r < m; ++r)
          if (basis[static_cast<std::size_t>(r)] == j) {
            inb = true;
            break;
          }
        if (inb) continue;
        long double rc = cost[static_cast<std::size_t>(j)];
        for (long r = 0; r < m; ++r)
          rc -= cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] *
                t[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        if (rc < -kRcTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      long leave = -1;
      long double best = 0;
      for (long r = 0; r < m; ++r) {
        const auto& row = t[static_cast<std::size_t>(r)];
        const long double col = row[static_cast<std::size_t>(enter)];
        if (col > kPivTol) {
          const long double ratio = row[row.size() - 1] / col;
          if (leave < 0 || ratio < best - 1e-18L ||
              (std::abs(ratio - best) <= 1e-18L &&
               basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)]))
          {
            leave = r;
            best = ratio;
          }
        }
      }
      if (leave < 0) return false;
      pivot_at(leave, enter);
    }
  };

  std::vector<long double> c1(static_cast<std::size_t>(nvar + m + 1), 0.0L);
  for (long j = nvar; j < nvar + m; ++j) c1[static_cast<std::size_t>(j)] = 1.0L;
  if (!run(c1, true)) return {};
  long double p1 = 0;
  for (long r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] >= nvar)
      p1 += t[static_cast<std::size_t>(r)][t[static_cast<std::size_t>(r)].size() - 1];
  if (p1 > 1e-10L) return {false, LVec(), 0.0L, pivots};
  // pivot leftover artificials to structurals, or drop redundant rows
  for (long r = 0; r < m;) {
    if (basis[static_cast<std::size_t>(r)] < nvar) {
      ++r;
      continue;
    }
    long enter = -1;
    for (long j = 0; j < nvar; ++j) {
      bool inb = false;
      for (long rr = 0; rr < m; ++rr)
        if (basis[static_cast<std::size_t>(rr)] == j) {
          inb = true;
          break;
        }
      if (!inb &&
          std::abs(t[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]) > kPivTol) {
        enter = j;
        break;
      }
    }
    if (enter >= 0) {
      pivot_at(r, enter);
      ++r;
    } else {
      t.erase(t.begin() + r);
      basis.erase(basis.begin() + r);
      --m;
      // artificial columns keep their slots; rows shrink only
    }
  }
  std::vector<long double> c2(static_cast<std::size_t>(nvar + m + 1), 0.0L);
  for (long j = 0; j < nvar; ++j) c2[static_cast<std::size_t>(j)] = c(j);
  // artificial column count in the tableau is stale after row drops, but
  // phase 2 never touches those columns
  if (!run(c2, false)) return {false, LVec(), 0.0L, pivots};
  LVec x = LVec::Zero(nvar);
  for (long r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] < nvar)
      x(basis[static_cast<std::size_t>(r)]) =
          t[static_cast<std::size_t>(r)][t[static_cast<std::size_t>(r)].size() - 1];
  x = x.cwiseMax(0.0L);
  return {true, x, c.dot(x), pivots};
}

// Newton-KKT step with the equality residual in the right-hand side, so any
// numerical drift off the affine set is pulled back instead of compounding
// across iterations.
inline bool kkt_step(const LMat& h, const LMat& nmat, const LVec& g,
                     const LVec& eq_resid, LVec& dx) {
  const long nv = h.rows(), ne = nmat.rows();
  LMat kkt = LMat::Zero(nv + ne, nv + ne);
  kkt.topLeftCorner(nv, nv) = h;
  kkt.topRightCorner(nv, ne) = nmat.transpose();
  kkt.bottomLeftCorner(ne, nv) = nmat;
  LVec rhs = LVec::Zero(nv + ne);
  rhs.head(nv) = -g;
  rhs.tail(ne) = eq_resid;
  Eigen::FullPivLU<LMat> lu(kkt);
  LVec sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  dx = sol.head(nv);
  return true;
}

// Centers  min c^T x + (lambda/2) x^T G x - sigma * sum_i log x_i  over
// Nx = b, sliding sigma from 1e-2 down to sigma_min with warm-started Newton
// steps. G is A^T A. The Newton system is solved in the scaled variable
// du = dx / x, which turns the barrier Hessian into exactly sigma * I; the
// system then stays well conditioned no matter how close the warm start sits
// to a vertex. The iterate stays strictly positive via a
// fraction-to-boundary cap. At the returned point the barrier duality gap of
// the quadratic program is at most (number of coordinates) * sigma_min.
inline bool qp_center(const LVec& c, long double lambda, const LMat& ata,
                      const LMat& nmat, const LVec& b, long double sigma_min,
                      LVec& x, long& steps) {
  const long nv = x.size();
  const long ne = nmat.rows();
  auto fval = [&](const LVec& xx, long double sigma, bool& ok) {
    ok = true;
    for (long i = 0; i < nv; ++i)
      if (xx(i) <= 0) ok = false;
    if (!ok) return 0.0L;
    long double v = c.dot(xx) + 0.5L * lambda * xx.dot(ata * xx);
    for (long i = 0; i < nv; ++i) v -= sigma * std::log(xx(i));
    return v;
  };
  long double sigma = 1e-2L;
  for (bool last = false; !last; sigma = std::max(sigma * 0.1L, sigma_min)) {
    last = sigma <= sigma_min;
    for (int inner = 0; inner < 60; ++inner) {
      const LVec gx = c + lambda * (ata * x) - sigma * x.cwiseInverse();
      LMat hs(nv, nv);
      for (long i = 0; i < nv; ++i)
        for (long j = 0; j < nv; ++j)
          hs(i, j) = lambda * x(i) * ata(i, j) * x(j);
      for (long i = 0; i < nv; ++i) hs(i, i) += sigma;
      LMat ns(ne, nv);
      for (long r = 0; r < ne; ++r)
        for (long j = 0; j < nv; ++j) ns(r, j) = nmat(r, j) * x(j);
      const LVec gs = x.cwiseProduct(gx);
      LVec du;
      if (!kkt_step(hs, ns, gs, b - nmat * x, du)) return false;
      const LVec dx = x.cwiseProduct(du);
      long double lam2 = -gs.dot(du);
      if (lam2 < 0) lam2 = 0;
      long double alpha = 1.0L;
      for (long i = 0; i < nv; ++i)
        if (du(i) < 0) alpha = std::min(alpha, 0.99L / (-du(i)));
      bool ok0 = false;
      const long double f0 = fval(x, sigma, ok0);
      const long double noise =
          8e-19L * std::max<long double>(1.0L, std::abs(f0));
      int bt = 0;
      for (; bt < 80; ++bt) {
        bool ok = false;
        LVec xn = x + alpha * dx;
        const long double fn = fval(xn, sigma, ok);
        if (ok && fn <= f0 - 1e-4L * alpha * lam2 + noise) {
          x = xn;
          break;
        }
        alpha *= 0.5L;
      }
      ++steps;
      if (bt >= 80) break;
      if (0.5L * lam2 < 1e-20L * std::max<long double>(1.0L, std::abs(f0)))
        break;
    }
  }
  return true;
}

struct PathOut {
  int status = 0;  // 0 certified optimum, 1 infeasible, 2 no certificate
  LVec x;
  long double gap = 0;
};

// Penalty-path solve of  min c^T x  s.t.  ||Ax|| <= eps_bar, Nx = b, x >= 0
// from a strictly positive start on the affine set, with c > 0 entrywise.
//
// For fixed lambda, QP(lambda) replaces the ball by the penalty
// (lambda/2)||Ax||^2; its residual phi(lambda) = ||A x*(lambda)|| is unique
// and nonincreasing, so a 1-D bracket-and-bisect on lambda lands phi at
// eps_bar. Every QP solve is a plain barrier center (qp_center), which never
// degenerates: the ball boundary enters the objective, not the constraint
// set. Any QP(lambda) center x gives the bound, valid for every ball-and-
// polytope-feasible y, with M = number of coordinates and sigma the final
// barrier weight:
//   c^T y >= c^T x + (lambda/2)(phi(x)^2 - eps_bar^2) - M * sigma.
// So a feasible iterate (phi <= eps_bar) carries the optimality gap
//   (lambda/2)(eps_bar^2 - phi^2) + M * sigma,
// and an iterate at the lambda cap whose bound exceeds any objective this
// problem family can attain certifies an empty intersection. The cutoff 1e8
// is conservative: n <= 6 instances with entry sums past 5e7 would need
// commutator cancellation across seven orders of magnitude.
inline PathOut penalty_path(const LVec& c, const LMat& a, long double eps_bar,
                            const LMat& nmat, const LVec& b, const LVec& x0,
                            long& steps) {
  const long m = a.cols();
  const LMat ata = a.transpose() * a;
  constexpr long double kLambdaCap = 2e10L;
  const long double e2 = eps_bar * eps_bar;
  const long double feas_slack = 1.0L + 1e-12L;
  PathOut out;

  // deeper centering at small lambda; shallower when lambda itself dominates
  // the Hessian and the deep ladder would only lose digits
  auto sigma_min_at = [&](long double lambda) {
    return std::max(1e-13L, lambda * 5e-17L);
  };
  auto phi = [&](const LVec& xx) {
    return std::sqrt(std::max(0.0L, xx.dot(ata * xx)));
  };
  auto solve_at = [&](long double lambda, LVec& xx) -> bool {
    return qp_center(c, lambda, ata, nmat, b, sigma_min_at(lambda), xx,
                     steps);
  };

  // bracket: walk lambda up (or down) by factors of 8 until the residual
  // crosses eps_bar
  long double lam_hi = 1.0L, lam_lo = 0.0L;
  LVec x_hi = x0, x_lo = x0;
  if (!solve_at(lam_hi, x_hi)) {
    out.status = 2;
    return out;
  }
  if (phi(x_hi) > eps_bar * feas_slack) {
    for (;;) {
      lam_lo = lam_hi;
      x_lo = x_hi;
      lam_hi *= 8.0L;
      if (lam_hi > kLambdaCap) {
        const long double p = phi(x_lo);
        const long double lower_bound =
            c.dot(x_lo) + 0.5L * lam_lo * (p * p - e2) -
            static_cast<long double>(m) * sigma_min_at(lam_lo);
        out.status = lower_bound > 1e8L ? 1 : 2;
        return out;
      }
      if (!solve_at(lam_hi, x_hi)) {
        out.status = 2;
        return out;
      }
      if (phi(x_hi) <= eps_bar * feas_slack) break;
    }
  } else {
    for (;;) {
      const long double lam_try = lam_hi / 8.0L;
      if (lam_try < 1e-14L) break;  // ball inactive: LP optimum is the answer
      LVec x_try = x_hi;
      if (!solve_at(lam_try, x_try)) {
        out.status = 2;
        return out;
      }
      if (phi(x_try) > eps_bar * feas_slack) {
        lam_lo = lam_try;
        x_lo = x_try;
        break;
      }
      lam_hi = lam_try;
      x_hi = x_try;
    }
  }

  auto gap_at = [&](long double lambda, const LVec& xx) {
    const long double p2 = xx.dot(ata * xx);
    return 0.5L * lambda * std::max(0.0L, e2 - p2) +
           static_cast<long double>(m) * sigma_min_at(lambda);
  };
  long double tol_gap =
      1e-10L * std::max<long double>(1.0L, std::abs(c.dot(x_hi)));
  for (int it = 0; it < 200 && gap_at(lam_hi, x_hi) > tol_gap; ++it) {
    if (lam_lo <= 0.0L || lam_hi / lam_lo < 1.0L + 1e-15L) break;
    const long double mid = std::sqrt(lam_lo * lam_hi);
    LVec x_mid = x_hi;
    if (!solve_at(mid, x_mid)) {
      out.status = 2;
      return out;
    }
    if (phi(x_mid) <= eps_bar * feas_slack) {
      lam_hi = mid;
      x_hi = x_mid;
    } else {
      lam_lo = mid;
      x_lo = x_mid;
    }
    tol_gap = 1e-10L * std::max<long double>(1.0L, std::abs(c.dot(x_hi)));
  }
  out.gap = gap_at(lam_hi, x_hi);
  out.x = x_hi;
  out.status = out.gap <= tol_gap ? 0 : 2;
  return out;
}

}  // namespace refdetail

// Accuracy-first oracle for instances with n <= 6. Same contract as
// solve_l1_commute; deliberately implemented through a different route.
inline SolveReport reference_solve_small(const Matrix& c,
                                         const SolverOptions& opts) {
  detail::check_solver_input(c, opts);
  const long n = c.rows();
  if (n > 6)
    throw Error(Errc::invalid_argument,
                "reference solver only handles n <= 6");
  detail::WallTimer timer;

  std::vector<std::pair<long, long>> pairs;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  const long m = static_cast<long>(pairs.size());

  const double s = c.norm();
  const double eps_eff =
      opts.epsilon_relative ? opts.epsilon * s : opts.epsilon;
  Matrix cn = c;
  long double eps_bar = 0;
  if (s > 0.0) {
    cn /= s;
    eps_bar = static_cast<long double>(eps_eff / s) / std::sqrt(2.0L);
  }

  // commutator of each pair basis element, upper-triangle rows
  refdetail::LMat a(m, m);
  for (long k = 0; k < m; ++k) {
    Matrix sb = Matrix::Zero(n, n);
    sb(pairs[static_cast<std::size_t>(k)].first,
       pairs[static_cast<std::size_t>(k)].second) = 1.0;
    sb(pairs[static_cast<std::size_t>(k)].second,
       pairs[static_cast<std::size_t>(k)].first) = 1.0;
    Matrix kc = cn * sb - sb * cn;
    for (long r = 0; r < m; ++r)
      a(r, k) = static_cast<long double>(
          kc(pairs[static_cast<std::size_t>(r)].first,
             pairs[static_cast<std::size_t>(r)].second));
  }

  refdetail::LMat nmat;
  refdetail::LVec b;
  if (opts.norm_mode == NormMode::first_row_unit) {
    nmat = refdetail::LMat::Zero(1, m);
    for (long k = 0; k < m; ++k)
      if (pairs[static_cast<std::size_t>(k)].first == 0) nmat(0, k) = 1.0L;
    b = refdetail::LVec::Ones(1);
  } else {
    nmat = refdetail::LMat::Zero(n, m);
    for (long k = 0; k < m; ++k) {
      nmat(pairs[static_cast<std::size_t>(k)].first, k) = 1.0L;
      nmat(pairs[static_cast<std::size_t>(k)].second, k) = 1.0L;
    }
    b = refdetail::LVec::Ones(n);
  }
  refdetail::LVec cobj = refdetail::LVec::Constant(m, 2.0L);

  SolveReport rep;
  rep.options = opts;
  long iters = 0;
  refdetail::LVec x;
  SolveStatus st = SolveStatus::optimal;

  if (eps_bar <= 0.0L && s > 0.0) {
    refdetail::LMat e(m + nmat.rows(), m);
    e.topRows(m) = a;
    e.bottomRows(nmat.rows()) = nmat;
    refdetail::LVec f = refdetail::LVec::Zero(m + nmat.rows());
    f.tail(nmat.rows()) = b;
    refdetail::SimplexOut so = refdetail::simplex_min(e, f, cobj);
    iters = so.pivots;
    if (!so.feasible) st = SolveStatus::infeasible;
    else x = so.x;
  } else {
    refdetail::SimplexOut so = refdetail::simplex_min(nmat, b, cobj);
    iters = so.pivots;
    if (!so.feasible) {
      st = SolveStatus::infeasible;
    } else if (s == 0.0 || (a * so.x).norm() <= eps_bar) {
      x = so.x;
    } else {
      // strictly positive start on the affine set, then the penalty path
      refdetail::LVec x0(m);
      if (opts.norm_mode == NormMode::first_row_unit) {
        for (long k = 0; k < m; ++k)
          x0(k) = pairs[static_cast<std::size_t>(k)].first == 0
                      ? 1.0L / static_cast<long double>(n - 1)
                      : 0.5L;
      } else {
        x0.setConstant(1.0L / static_cast<long double>(n - 1));
      }
      long steps = 0;
      refdetail::PathOut po =
          refdetail::penalty_path(cobj, a, eps_bar, nmat, b, x0, steps);
      iters += steps;
      if (po.status == 1) {
        st = SolveStatus::infeasible;
      } else if (po.status == 2) {
        st = SolveStatus::max_iter;
      } else {
        x = po.x;
        // the zero-radius vertex is feasible for any radius, so it bounds
        // the ball optimum from above; keep whichever is better
        refdetail::LMat e(m + nmat.rows(), m);
        e.topRows(m) = a;
        e.bottomRows(nmat.rows()) = nmat;
        refdetail::LVec f = refdetail::LVec::Zero(m + nmat.rows());
        f.tail(nmat.rows()) = b;
        refdetail::SimplexOut eq = refdetail::simplex_min(e, f, cobj);
        iters += eq.pivots;
        if (eq.feasible && eq.obj < cobj.dot(x)) x = eq.x;
      }
    }
  }

  if (st != SolveStatus::infeasible && x.size() == m) {
    Matrix smat = Matrix::Zero(n, n);
    for (long k = 0; k < m; ++k) {
      const double v = std::max(0.0, static_cast<double>(x(k)));
      smat(pairs[static_cast<std::size_t>(k)].first,
           pairs[static_cast<std::size_t>(k)].second) = v;
      smat(pairs[static_cast<std::size_t>(k)].second,
           pairs[static_cast<std::size_t>(k)].first) = v;
    }
    rep.s_full = Gso{n, smat, opts.norm_mode};
    rep.objective = smat.sum();
    rep.commut_residual = (c * smat - smat * c).norm();
  }
  rep.status = st;
  rep.iterations = iters;
  rep.wall_time_s = timer.seconds();
  return rep;
}

}  // namespace prodgraph
