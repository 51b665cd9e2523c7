#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "prodgraph/errors.hpp"

namespace prodgraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class NormMode { row_stochastic, first_row_unit, binary_unnormalized };

inline const char* norm_mode_token(NormMode m) {
  switch (m) {
    case NormMode::row_stochastic: return "rowstoch";
    case NormMode::first_row_unit: return "firstrow";
    case NormMode::binary_unnormalized: return "binary";
  }
  return "?";
}

inline const char* norm_mode_name(NormMode m) {
  switch (m) {
    case NormMode::row_stochastic: return "row-stochastic";
    case NormMode::first_row_unit: return "first-row-unit";
    case NormMode::binary_unnormalized: return "binary-unnormalized";
  }
  return "?";
}

inline NormMode norm_mode_from_name(const std::string& s) {
  if (s == "row-stochastic" || s == "rowstoch") return NormMode::row_stochastic;
  if (s == "first-row-unit" || s == "firstrow") return NormMode::first_row_unit;
  if (s == "binary-unnormalized" || s == "binary")
    return NormMode::binary_unnormalized;
  throw Error(Errc::invalid_argument, "unknown normalization mode '" + s + "'");
}

// Graph shift operator: symmetric, hollow, nonnegative weight matrix with a
// declared normalization.
struct Gso {
  long n = 0;
  Matrix weights;
  NormMode norm_mode = NormMode::binary_unnormalized;
};

namespace detail {
inline constexpr double kGsoTol = 1e-9;
}

// Checks run in a fixed order: symmetry, diagonal, sign, normalization.
// The thrown Error names the first offending index in scan order.
inline void check_gso_weights(const Matrix& w, NormMode mode,
                              double tol = detail::kGsoTol) {
  const long n = w.rows();
  if (n < 1 || w.cols() != n)
    throw Error(Errc::dimension_mismatch,
                "weight matrix must be square and nonempty");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j)
      if (std::abs(w(i, j) - w(j, i)) > tol * scale)
        throw Error(Errc::asymmetric_matrix,
                    "weights[" + std::to_string(i) + "][" + std::to_string(j) +
                        "] != weights[" + std::to_string(j) + "][" +
                        std::to_string(i) + "]",
                    i, j);
  for (long i = 0; i < n; ++i)
    if (std::abs(w(i, i)) > tol * scale)
      throw Error(Errc::nonzero_diagonal,
                  "weights[" + std::to_string(i) + "][" + std::to_string(i) +
                      "] = " + std::to_string(w(i, i)),
                  i, i);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      if (w(i, j) < -tol * scale)
        throw Error(Errc::negative_entry,
                    "weights[" + std::to_string(i) + "][" + std::to_string(j) +
                        "] = " + std::to_string(w(i, j)),
                    i, j);
  if (mode == NormMode::row_stochastic) {
    for (long i = 0; i < n; ++i) {
      const double s = w.row(i).sum();
      if (std::abs(s - 1.0) > tol)
        throw Error(Errc::normalization_violated,
                    "row " + std::to_string(i) + " sums to " +
                        std::to_string(s) + ", expected 1",
                    i);
    }
  } else if (mode == NormMode::first_row_unit) {
    const double s = w.row(0).sum();
    if (std::abs(s - 1.0) > tol)
      throw Error(Errc::normalization_violated,
                  "first row sums to " + std::to_string(s) + ", expected 1", 0);
  }
}

inline Gso validate_gso(const Matrix& w, NormMode mode) {
  check_gso_weights(w, mode);
  return Gso{w.rows(), w, mode};
}

inline Gso validate_gso(Matrix&& w, NormMode mode) {
  check_gso_weights(w, mode);
  Gso g;
  g.n = w.rows();
  g.weights = std::move(w);
  g.norm_mode = mode;
  return g;
}

}  // namespace prodgraph
