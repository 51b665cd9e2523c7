#pragma once

#include <Eigen/Dense>

#include "prodgraph/errors.hpp"
#include "prodgraph/gso.hpp"

namespace prodgraph {

struct EigPair {
  Matrix vectors;  // columns are eigenvectors, orthonormal
  Vector values;   // ascending
};

// Symmetric eigendecomposition with a deterministic sign convention: each
// eigenvector's first entry of magnitude above 1e-10 is made positive.
inline EigPair eig_sym(const Matrix& m, double sym_tol = 1e-9) {
  if (m.rows() != m.cols())
    throw Error(Errc::dimension_mismatch, "eig_sym needs a square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw Error(Errc::asymmetric_matrix, "eig_sym input is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      (m + m.transpose()) / 2.0);
  if (es.info() != Eigen::Success)
    throw Error(Errc::convergence_failure, "eigendecomposition failed");
  EigPair out{es.eigenvectors(), es.eigenvalues()};
  for (long c = 0; c < out.vectors.cols(); ++c) {
    for (long r = 0; r < out.vectors.rows(); ++r) {
      const double v = out.vectors(r, c);
      if (v > 1e-10) break;
      if (v < -1e-10) {
        out.vectors.col(c) = -out.vectors.col(c);
        break;
      }
    }
  }
  return out;
}

}  // namespace prodgraph
