#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "prodgraph/eig.hpp"
#include "prodgraph/gso.hpp"
#include "prodgraph/solver_options.hpp"

namespace prodgraph {
namespace detail {

// Euclidean projection onto {x >= 0, sum x = mass}.
inline void project_simplex(Eigen::Ref<Vector> v, double mass = 1.0) {
  const long n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (long k = 0; k < n; ++k) {
    css += u[static_cast<std::size_t>(k)];
    const double t = (css - mass) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  v = (v.array() - theta).max(0.0);
}

// Projection onto the symmetric affine set {S = S^T, S 1 = 1}.
inline void project_row_sum_affine(Matrix& s) {
  const long n = s.rows();
  Vector r = Vector::Ones(n) - s.rowwise().sum();
  const double rbar = r.sum() / static_cast<double>(n);
  Vector mu = (2.0 * r.array() - rbar).matrix() / static_cast<double>(n);
  s += (mu * Vector::Ones(n).transpose() +
        Vector::Ones(n) * mu.transpose()) /
       2.0;
}

// Exact projection onto the shift-operator set for the given normalization.
//
// first-row-unit: in the symmetric hollow space every upper entry carries the
// same Frobenius weight, so the projection splits into a simplex projection
// of the first row and a clamp of the rest.
//
// row-stochastic: Dykstra's alternating projections between
// {symmetric hollow, offdiag >= 0} and {symmetric, row sums 1}.
inline void project_gso_set(Matrix& s, NormMode mode) {
  const long n = s.rows();
  s = ((s + s.transpose()) / 2.0).eval();
  s.diagonal().setZero();
  if (mode == NormMode::first_row_unit) {
    Vector head = s.row(0).segment(1, n - 1).transpose();
    project_simplex(head);
    s.row(0).segment(1, n - 1) = head.transpose();
    s.col(0).segment(1, n - 1) = head;
    s.block(1, 1, n - 1, n - 1) =
        s.block(1, 1, n - 1, n - 1).cwiseMax(0.0).eval();
    s.diagonal().setZero();
    return;
  }
  if (mode == NormMode::row_stochastic) {
    Matrix x = s, p = Matrix::Zero(n, n), q = Matrix::Zero(n, n);
    for (int it = 0; it < 500; ++it) {
      Matrix y = x + p;
      y.diagonal().setZero();
      y = y.cwiseMax(0.0).eval();
      y.diagonal().setZero();
      p = x + p - y;
      Matrix xn = y + q;
      project_row_sum_affine(xn);
      q = y + q - xn;
      const double change = (xn - x).norm();
      x = xn;
      if (change < 1e-13 * std::max(1.0, x.norm()) && it > 2) break;
    }
    // land exactly in the closed clamp set; the affine defect stays within
    // the Dykstra tolerance
    x.diagonal().setZero();
    x = x.cwiseMax(0.0).eval();
    x = ((x + x.transpose()) / 2.0).eval();
    s = x;
    return;
  }
  throw Error(Errc::invalid_argument,
              "solver normalization must be first-row-unit or row-stochastic");
}

// Projection onto {x : sum_i d_i x_i^2 <= eps^2} in the Euclidean metric.
// KKT gives x_i = y_i / (1 + mu d_i) with mu the root of the monotone convex
// phi(mu) = sum d y^2 / (1 + mu d)^2 = eps^2; Newton from the left converges
// monotonically. Weights at or below d_tol count as exactly zero (free).
inline void shrink_weighted(Eigen::Ref<Eigen::ArrayXd> t,
                            const Eigen::ArrayXd& d, double d_tol, double eps) {
  Eigen::ArrayXd dd = (d > d_tol).select(d, 0.0);
  if (eps <= 0.0) {
    t = (dd > 0.0).select(0.0, t);
    return;
  }
  const double r2 = (dd * t * t).sum();
  if (r2 <= eps * eps) return;
  double mu = 0.0, phi = r2;
  const double target = eps * eps;
  for (int it = 0; it < 200; ++it) {
    Eigen::ArrayXd den = 1.0 + mu * dd;
    Eigen::ArrayXd num = dd * t * t;
    phi = (num / (den * den)).sum();
    if (phi <= target * (1.0 + 1e-14)) break;
    const double dphi = -2.0 * (num * dd / (den * den * den)).sum();
    if (dphi >= 0.0) break;
    const double step = (phi - target) / dphi;
    const double mu_next = mu - step;
    if (!(mu_next > mu)) break;
    mu = mu_next;
  }
  t /= (1.0 + mu * dd);
}

// A constraint ball {S : ||A(S)||_F <= eps} for a self-adjoint-compatible
// linear operator A, with exact projection and a support function used by the
// infeasibility certificate.
class ConstraintBall {
 public:
  virtual ~ConstraintBall() = default;
  virtual void project(Matrix& s) const = 0;
  virtual double residual(const Matrix& s) const = 0;  // ||A(S)||_F
  // sup over the ball of <G, .>_F; +inf when G excites the nullspace of A.
  virtual double support(const Matrix& g) const = 0;
  virtual double eps() const = 0;
};

// Commutator ball for a fixed symmetric C: A(S) = CS - SC. In C's eigenbasis
// the operator is diagonal with weights (lambda_i - lambda_j)^2 on the
// rotated coordinates, so the projection is a closed-form shrinkage.
class SpectralBall final : public ConstraintBall {
 public:
  SpectralBall(const Matrix& c, double eps) : eps_(eps), c_(c) {
    EigPair e = eig_sym(c);
    v_ = e.vectors;
    const Vector& lam = e.values;
    const long n = lam.size();
    d_.resize(n * n);
    for (long j = 0, k = 0; j < n; ++j)
      for (long i = 0; i < n; ++i, ++k) {
        const double gap = lam(i) - lam(j);
        d_(k) = gap * gap;
      }
    const double spread = lam(n - 1) - lam(0);
    const double gap_tol = 1e-8 * std::max(spread, 1e-300);
    d_tol_ = gap_tol * gap_tol;
  }

  void project(Matrix& s) const override {
    Matrix t = v_.transpose() * s * v_;
    Eigen::Map<Eigen::ArrayXd> tv(t.data(), t.size());
    shrink_weighted(tv, d_, d_tol_, eps_);
    s.noalias() = v_ * t * v_.transpose();
    s = ((s + s.transpose()) / 2.0).eval();
  }

  double residual(const Matrix& s) const override {
    return (c_ * s - s * c_).norm();
  }

  double support(const Matrix& g) const override {
    Matrix t = v_.transpose() * g * v_;
    Eigen::Map<const Eigen::ArrayXd> tv(t.data(), t.size());
    double free2 = 0.0, sum = 0.0;
    for (long k = 0; k < tv.size(); ++k) {
      if (d_(k) <= d_tol_) free2 += tv(k) * tv(k);
      else sum += tv(k) * tv(k) / d_(k);
    }
    if (free2 > 1e-14 * tv.square().sum())
      return std::numeric_limits<double>::infinity();
    return eps_ * std::sqrt(sum);
  }

  double eps() const override { return eps_; }

 private:
  double eps_;
  Matrix c_, v_;
  Eigen::ArrayXd d_;
  double d_tol_;
};

// Ball for a general linear operator on n x n symmetric matrices, built by
// applying the operator to the orthonormal symmetric basis and
// eigendecomposing the resulting Gram matrix. The operator itself is only
// ever applied to the m = n(n+1)/2 basis elements.
class GramBall final : public ConstraintBall {
 public:
  GramBall(long n, const std::function<Matrix(const Matrix&)>& apply,
           double eps)
      : n_(n), m_(n * (n + 1) / 2), eps_(eps) {
    Matrix gram(m_, m_);
    std::vector<Matrix> img;
    img.reserve(static_cast<std::size_t>(m_));
    for (long k = 0; k < m_; ++k) img.push_back(apply(basis_mat(k)));
    for (long k = 0; k < m_; ++k)
      for (long l = k; l < m_; ++l)
        gram(k, l) = gram(l, k) =
            img[static_cast<std::size_t>(k)]
                .cwiseProduct(img[static_cast<std::size_t>(l)])
                .sum();
    EigPair e = eig_sym(gram, /*sym_tol=*/1e-6);
    u_ = e.vectors;
    d_ = e.values.cwiseMax(0.0).array();
    d_tol_ = 1e-12 * std::max(d_.maxCoeff(), 1e-300);
  }

  Vector coords(const Matrix& s) const {
    Vector x(m_);
    long k = 0;
    for (long i = 0; i < n_; ++i) x(k++) = s(i, i);
    const double rt2 = std::sqrt(2.0);
    for (long i = 0; i < n_; ++i)
      for (long j = i + 1; j < n_; ++j) x(k++) = rt2 * s(i, j);
    return x;
  }

  Matrix from_coords(const Vector& x) const {
    Matrix s(n_, n_);
    long k = 0;
    for (long i = 0; i < n_; ++i) s(i, i) = x(k++);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    for (long i = 0; i < n_; ++i)
      for (long j = i + 1; j < n_; ++j) {
        s(i, j) = s(j, i) = inv_rt2 * x(k);
        ++k;
      }
    return s;
  }

  void project(Matrix& s) const override {
    Vector y = u_.transpose() * coords(s);
    Eigen::Map<Eigen::ArrayXd> yv(y.data(), y.size());
    shrink_weighted(yv, d_, d_tol_, eps_);
    s = from_coords(u_ * y);
  }

  // consistent with project(): weights at or below d_tol are exactly free
  double residual(const Matrix& s) const override {
    Vector y = u_.transpose() * coords(s);
    double sum = 0.0;
    for (long k = 0; k < m_; ++k)
      if (d_(k) > d_tol_) sum += d_(k) * y(k) * y(k);
    return std::sqrt(sum);
  }

  double support(const Matrix& g) const override {
    Vector h = u_.transpose() * coords(g);
    double free2 = 0.0, sum = 0.0;
    for (long k = 0; k < m_; ++k) {
      if (d_(k) <= d_tol_) free2 += h(k) * h(k);
      else sum += h(k) * h(k) / d_(k);
    }
    if (free2 > 1e-14 * h.squaredNorm())
      return std::numeric_limits<double>::infinity();
    return eps_ * std::sqrt(sum);
  }

  double eps() const override { return eps_; }

 private:
  Matrix basis_mat(long k) const {
    Matrix b = Matrix::Zero(n_, n_);
    if (k < n_) {
      b(k, k) = 1.0;
      return b;
    }
    long r = k - n_;
    for (long i = 0; i < n_; ++i) {
      const long row_len = n_ - 1 - i;
      if (r < row_len) {
        const long j = i + 1 + r;
        b(i, j) = b(j, i) = 1.0 / std::sqrt(2.0);
        return b;
      }
      r -= row_len;
    }
    throw Error(Errc::invalid_argument, "basis index out of range");
  }

  long n_, m_;
  double eps_;
  Matrix u_;
  Eigen::ArrayXd d_;
  double d_tol_;
};

// Separating-direction certificate for an empty intersection of the shift
// set and the ball: with g the normalized gap direction, infeasibility is
// declared when min over the shift set of <g, S> exceeds the ball's support
// value by a clear margin. Tolerance-scaled, as any floating-point
// certificate must be.
inline bool certify_infeasible(const Matrix& x, const Matrix& y, NormMode mode,
                               const ConstraintBall& ball) {
  Matrix g = x - y;
  const double gn = g.norm();
  if (gn <= 1e-12) return false;
  g /= gn;
  const long n = g.rows();
  double lower;
  if (mode == NormMode::first_row_unit) {
    // the shift set is unbounded in every non-first-row coordinate, so those
    // components of g must be (numerically) nonnegative for a finite minimum
    for (long i = 1; i < n; ++i)
      for (long j = 1; j < n; ++j)
        if (i != j) {
          if (g(i, j) < -1e-7) return false;
          if (g(i, j) < 0.0) g(i, j) = 0.0;
        }
    double mn = std::numeric_limits<double>::infinity();
    for (long j = 1; j < n; ++j) mn = std::min(mn, g(0, j));
    lower = 2.0 * mn;
  } else {
    // rows sum to 1 with nonnegative entries, so each row's inner product is
    // at least its smallest off-diagonal entry
    lower = 0.0;
    for (long i = 0; i < n; ++i) {
      double mn = std::numeric_limits<double>::infinity();
      for (long j = 0; j < n; ++j)
        if (j != i) mn = std::min(mn, g(i, j));
      lower += mn;
    }
  }
  const double sup = ball.support(g);
  if (std::isinf(sup)) return false;
  return lower - sup > 1e-6;
}

struct DrOutcome {
  Matrix x;
  long iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
};

// Douglas-Rachford splitting for  min <J, S> + i_Set(S) + i_Ball(S)  with
// J the all-ones off-diagonal matrix. Both proximal maps are exact, so the
// iteration is a fixed-point scheme on the reflected steps; the returned
// iterate always lies in the shift set exactly.
inline DrOutcome dr_solve(long n, NormMode mode, const ConstraintBall& ball,
                          double gamma, double tol, long max_iter) {
  Matrix j = Matrix::Ones(n, n);
  j.diagonal().setZero();
  Matrix z = Matrix::Constant(n, n, 1.0 / static_cast<double>(n - 1));
  z.diagonal().setZero();
  DrOutcome out;
  Matrix x(n, n), y(n, n);
  double prev_fp = std::numeric_limits<double>::infinity();
  int stall = 0;
  const double eps = ball.eps();
  // the objective error tracks the fixed-point gap, so the iteration is run
  // two orders below the feasibility tolerance tol
  const double fp_tol = 0.01 * tol;
  for (long it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    x = z - gamma * j;
    project_gso_set(x, mode);
    y = 2.0 * x - z;
    ball.project(y);
    z += y - x;
    const double fp = (y - x).norm();
    const double xs = std::max(1.0, x.norm());
    if (fp <= fp_tol * xs) {
      if (ball.residual(x) <= eps + tol) {
        out.status = SolveStatus::optimal;
        break;
      }
      if (certify_infeasible(x, y, mode, ball)) {
        out.status = SolveStatus::infeasible;
        break;
      }
    }
    if (it % 50 == 0) {
      if (fp > 100.0 * tol * xs && fp > prev_fp * (1.0 - 1e-3)) {
        if (++stall >= 5) {
          if (certify_infeasible(x, y, mode, ball)) {
            out.status = SolveStatus::infeasible;
            break;
          }
          stall = 0;
        }
      } else {
        stall = 0;
      }
      prev_fp = fp;
    }
  }
  out.x = x;
  return out;
}

}  // namespace detail
}  // namespace prodgraph
