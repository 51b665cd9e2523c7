#pragma once

#include <string>

#include "prodgraph/gso.hpp"

namespace prodgraph {

enum class ProductKind { kronecker, cartesian, strong };

inline const char* product_kind_name(ProductKind k) {
  switch (k) {
    case ProductKind::kronecker: return "kronecker";
    case ProductKind::cartesian: return "cartesian";
    case ProductKind::strong: return "strong";
  }
  return "?";
}

inline ProductKind product_kind_from_name(const std::string& s) {
  if (s == "kronecker") return ProductKind::kronecker;
  if (s == "cartesian") return ProductKind::cartesian;
  if (s == "strong") return ProductKind::strong;
  throw Error(Errc::invalid_argument, "unknown product kind '" + s + "'");
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Product shift over the composite node set. Node (p, q) sits at index
// p + q * P, matching the column-major vectorization of a P x Q signal, so
// the Kronecker form is Sq (x) Sp.
inline Matrix product_weights(const Matrix& sp, const Matrix& sq,
                              ProductKind kind) {
  const long P = sp.rows(), Q = sq.rows();
  switch (kind) {
    case ProductKind::kronecker: return kron(sq, sp);
    case ProductKind::cartesian:
      return kron(sq, Matrix::Identity(P, P)) +
             kron(Matrix::Identity(Q, Q), sp);
    case ProductKind::strong:
      return kron(sq, sp) + kron(sq, Matrix::Identity(P, P)) +
             kron(Matrix::Identity(Q, Q), sp);
  }
  throw Error(Errc::invalid_argument, "unknown product kind");
}

inline Gso product(const Gso& sp, const Gso& sq, ProductKind kind) {
  check_gso_weights(sp.weights, NormMode::binary_unnormalized);
  check_gso_weights(sq.weights, NormMode::binary_unnormalized);
  Matrix w = product_weights(sp.weights, sq.weights, kind);
  return Gso{w.rows(), std::move(w), NormMode::binary_unnormalized};
}

}  // namespace prodgraph
