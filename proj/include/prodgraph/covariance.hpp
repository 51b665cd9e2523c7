#pragma once

#include <optional>

#include "prodgraph/filter.hpp"
#include "prodgraph/product.hpp"
#include "prodgraph/signal.hpp"

namespace prodgraph {

enum class CovProvenance { analytic, sample };

struct CovarianceSet {
  Matrix c_p, c_q;                // P x P and Q x Q factor covariances
  std::optional<Matrix> c_y;      // PQ x PQ joint covariance, when materialized
  CovProvenance provenance = CovProvenance::analytic;
  long sample_count = 0;          // 0 for analytic
};

// For Y = H_P W H_Q with white W:
//   E[Y Y^T]      = tr(H_Q^2) H_P^2
//   E[Y^T Y]      = tr(H_P^2) H_Q^2
//   cov(vec Y)    = H_Q^2 (x) H_P^2
inline CovarianceSet analytic_cov(const PolyFilter& hp, const PolyFilter& hq,
                                  bool include_full = false) {
  CovarianceSet c;
  Matrix hp2 = hp.matrix * hp.matrix;
  Matrix hq2 = hq.matrix * hq.matrix;
  c.c_p = hq2.trace() * hp2;
  c.c_q = hp2.trace() * hq2;
  if (include_full) c.c_y = kron(hq2, hp2);
  c.provenance = CovProvenance::analytic;
  return c;
}

// Empirical second moments, normalized by the realization count:
//   C_P = (1/R) sum Y_r Y_r^T, C_Q = (1/R) sum Y_r^T Y_r,
//   C_y = (1/R) sum vec(Y_r) vec(Y_r)^T.
inline CovarianceSet sample_cov(const SignalTensor& t, bool include_full = false) {
  if (t.slabs.empty())
    throw Error(Errc::invalid_argument, "tensor holds no realizations");
  const long P = t.P, Q = t.Q, N = P * Q;
  CovarianceSet c;
  c.c_p = Matrix::Zero(P, P);
  c.c_q = Matrix::Zero(Q, Q);
  if (include_full) c.c_y = Matrix::Zero(N, N);
  for (const Matrix& y : t.slabs) {
    c.c_p.noalias() += y * y.transpose();
    c.c_q.noalias() += y.transpose() * y;
    if (include_full) {
      Eigen::Map<const Vector> v(y.data(), N);
      c.c_y->noalias() += v * v.transpose();
    }
  }
  const double inv_r = 1.0 / static_cast<double>(t.R);
  c.c_p *= inv_r;
  c.c_q *= inv_r;
  c.c_p = ((c.c_p + c.c_p.transpose()) / 2.0).eval();
  c.c_q = ((c.c_q + c.c_q.transpose()) / 2.0).eval();
  if (include_full) {
    *c.c_y *= inv_r;
    *c.c_y = ((*c.c_y + c.c_y->transpose()) / 2.0).eval();
  }
  c.provenance = CovProvenance::sample;
  c.sample_count = t.R;
  return c;
}

// Partial trace over the Q dimension: sum of the Q diagonal P x P blocks.
// For C_y built from a P x Q signal this equals C_P exactly.
inline Matrix partial_trace_q(const Matrix& c_y, long P, long Q) {
  if (c_y.rows() != P * Q || c_y.cols() != P * Q)
    throw Error(Errc::dimension_mismatch, "partial trace dimensions disagree");
  Matrix out = Matrix::Zero(P, P);
  for (long q = 0; q < Q; ++q) out += c_y.block(q * P, q * P, P, P);
  return out;
}

// Partial trace over the P dimension: (a, b) entry is the trace of block
// (a, b). Equals C_Q exactly.
inline Matrix partial_trace_p(const Matrix& c_y, long P, long Q) {
  if (c_y.rows() != P * Q || c_y.cols() != P * Q)
    throw Error(Errc::dimension_mismatch, "partial trace dimensions disagree");
  Matrix out(Q, Q);
  for (long a = 0; a < Q; ++a)
    for (long b = 0; b < Q; ++b)
      out(a, b) = c_y.block(a * P, b * P, P, P).trace();
  return out;
}

}  // namespace prodgraph
