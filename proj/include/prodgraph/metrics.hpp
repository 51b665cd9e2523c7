#pragma once

#include <cmath>
#include <limits>

#include "prodgraph/gso.hpp"
#include "prodgraph/product.hpp"

namespace prodgraph {

// Relative-threshold binarization: an edge survives when its weight reaches
// tau times the largest weight. A zero matrix stays zero.
inline Matrix binarize(const Matrix& s, double tau = 0.1) {
  if (s.rows() != s.cols())
    throw Error(Errc::dimension_mismatch, "binarize needs a square matrix");
  if (!(tau > 0.0) || !(tau <= 1.0))
    throw Error(Errc::invalid_argument, "tau must lie in (0, 1]");
  const double mx = s.maxCoeff();
  if (s.minCoeff() < -detail::kGsoTol * std::max(1.0, std::abs(mx)))
    throw Error(Errc::negative_entry, "binarize expects nonnegative weights");
  Matrix out = Matrix::Zero(s.rows(), s.cols());
  if (mx <= 0.0) return out;
  const double cut = tau * mx;
  for (long i = 0; i < s.rows(); ++i)
    for (long j = 0; j < s.cols(); ++j)
      if (i != j && s(i, j) >= cut) out(i, j) = 1.0;
  return out;
}

struct EvalResult {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, fscore = 0.0;
};

// Edge-set F-score over unordered pairs. Empty prediction against a
// nonempty truth scores zero by convention (as does the reverse).
inline EvalResult fscore(const Matrix& pred01, const Matrix& truth01) {
  if (pred01.rows() != truth01.rows() || pred01.cols() != truth01.cols() ||
      pred01.rows() != pred01.cols())
    throw Error(Errc::dimension_mismatch,
                "prediction and truth must be square and same size");
  EvalResult r;
  for (long i = 0; i < pred01.rows(); ++i)
    for (long j = i + 1; j < pred01.cols(); ++j) {
      const bool p = pred01(i, j) != 0.0;
      const bool t = truth01(i, j) != 0.0;
      if (p && t) ++r.tp;
      else if (p) ++r.fp;
      else if (t) ++r.fn;
    }
  r.precision = (r.tp + r.fp) > 0
                    ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp)
                    : 0.0;
  r.recall = (r.tp + r.fn) > 0
                 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                 : 0.0;
  r.fscore = (2 * r.tp + r.fp + r.fn) > 0
                 ? 2.0 * static_cast<double>(r.tp) /
                       static_cast<double>(2 * r.tp + r.fp + r.fn)
                 : 0.0;
  return r;
}

// Squared Frobenius norm of the commutator of C with S.
inline double commutativity(const Matrix& c, const Matrix& s) {
  if (c.rows() != c.cols() || s.rows() != s.cols() || c.rows() != s.rows())
    throw Error(Errc::dimension_mismatch, "commutativity needs matching squares");
  return (c * s - s * c).squaredNorm();
}

struct ProductEval {
  EvalResult factor_p, factor_q, prod;
  double commut = std::numeric_limits<double>::quiet_NaN();
};

// Factor-level and product-level scoring of a factor-pair estimate. The
// product F-score compares the product of the binarized estimates with the
// product of the true factors; commutativity (when a covariance is supplied)
// is measured on the raw weighted product estimate.
inline ProductEval eval_product(const Matrix& sp_est, const Matrix& sq_est,
                                const Matrix& sp_true, const Matrix& sq_true,
                                ProductKind kind, const Matrix* cov,
                                double tau = 0.1) {
  ProductEval out;
  Matrix bp = binarize(sp_est, tau), bq = binarize(sq_est, tau);
  Matrix tp = binarize(sp_true, tau), tq = binarize(sq_true, tau);
  out.factor_p = fscore(bp, tp);
  out.factor_q = fscore(bq, tq);
  Matrix prod_est = product_weights(bp, bq, kind);
  Matrix prod_true = product_weights(tp, tq, kind);
  out.prod = fscore(binarize(prod_est, tau), binarize(prod_true, tau));
  if (cov) {
    Matrix raw = product_weights(sp_est, sq_est, kind);
    out.commut = commutativity(*cov, raw);
  }
  return out;
}

}  // namespace prodgraph
