#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prodgraph/eig.hpp"
#include "prodgraph/filter.hpp"
#include "prodgraph/gso.hpp"
#include "prodgraph/rng.hpp"

namespace prodgraph {

enum class GeneratorKind { two_filter, mrf, poly_cov };

inline const char* generator_name(GeneratorKind g) {
  switch (g) {
    case GeneratorKind::two_filter: return "two-filter";
    case GeneratorKind::mrf: return "mrf";
    case GeneratorKind::poly_cov: return "poly-cov";
  }
  return "?";
}

inline GeneratorKind generator_from_name(const std::string& s) {
  if (s == "two-filter") return GeneratorKind::two_filter;
  if (s == "mrf") return GeneratorKind::mrf;
  if (s == "poly-cov") return GeneratorKind::poly_cov;
  throw Error(Errc::invalid_argument, "unknown generator '" + s + "'");
}

// R realizations of a P x Q signal.
struct SignalTensor {
  long P = 0, Q = 0, R = 0;
  GeneratorKind generator = GeneratorKind::two_filter;
  std::uint64_t seed = 0;
  std::vector<Matrix> slabs;
};

// White Gaussian P x Q draw; entry (i, j) is the normal draw at the entry's
// column-major index, so any slab can be produced independently of the rest.
inline Matrix standard_normal_matrix(long rows, long cols, const CounterRng& rng) {
  Matrix w(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i)
      w(i, j) = rng.normal(static_cast<std::uint64_t>(i + j * rows));
  return w;
}

inline Matrix standard_normal_matrix(long rows, long cols, std::uint64_t seed,
                                     std::uint64_t stream) {
  return standard_normal_matrix(rows, cols, CounterRng(seed, stream));
}

namespace detail {
// Slab r of every generator draws from substream r of a per-tensor base
// stream, keeping parallel slab generation identical to sequential.
inline CounterRng slab_stream(std::uint64_t seed, std::uint64_t r) {
  return CounterRng(seed, /*stream=*/0x534c4142ULL).split(r);
}
}  // namespace detail

// Y_r = H_P W_r H_Q with W_r white.
inline SignalTensor generate_2d(const PolyFilter& hp, const PolyFilter& hq,
                                long R, std::uint64_t seed) {
  if (R < 1) throw Error(Errc::invalid_argument, "need at least one realization");
  const long P = hp.shift.n, Q = hq.shift.n;
  SignalTensor t{P, Q, R, GeneratorKind::two_filter, seed, {}};
  t.slabs.reserve(static_cast<std::size_t>(R));
  for (long r = 0; r < R; ++r) {
    Matrix w = standard_normal_matrix(P, Q, detail::slab_stream(seed, static_cast<std::uint64_t>(r)));
    t.slabs.emplace_back(hp.matrix * w * hq.matrix);
  }
  return t;
}

namespace detail {
inline SignalTensor sample_from_cov_root(const Matrix& root, long P, long Q,
                                         long R, GeneratorKind kind,
                                         std::uint64_t seed) {
  SignalTensor t{P, Q, R, kind, seed, {}};
  t.slabs.reserve(static_cast<std::size_t>(R));
  const long N = P * Q;
  for (long r = 0; r < R; ++r) {
    Matrix w = standard_normal_matrix(N, 1, slab_stream(seed, static_cast<std::uint64_t>(r)));
    Vector y = root * w.col(0);
    t.slabs.emplace_back(Eigen::Map<const Matrix>(y.data(), P, Q));
  }
  return t;
}
}  // namespace detail

// Gauss-Markov field on a product shift: covariance (a I + S)^{-1} with
// a = |lambda_min(S)| + 0.1, so the precision matrix is positive definite.
inline SignalTensor generate_mrf(const Gso& s, long P, long Q, long R,
                                 std::uint64_t seed) {
  if (P * Q != s.n)
    throw Error(Errc::dimension_mismatch,
                "product shift is " + std::to_string(s.n) + "x" +
                    std::to_string(s.n) + ", expected " + std::to_string(P * Q));
  if (R < 1) throw Error(Errc::invalid_argument, "need at least one realization");
  EigPair e = eig_sym(s.weights);
  const double alpha = std::abs(e.values.minCoeff()) + 0.1;
  Vector root = (e.values.array() + alpha).inverse().sqrt().matrix();
  Matrix cov_root = e.vectors * root.asDiagonal() * e.vectors.transpose();
  return detail::sample_from_cov_root(cov_root, P, Q, R, GeneratorKind::mrf, seed);
}

inline Matrix mrf_cov(const Gso& s) {
  EigPair e = eig_sym(s.weights);
  const double alpha = std::abs(e.values.minCoeff()) + 0.1;
  Vector inv = (e.values.array() + alpha).inverse().matrix();
  return e.vectors * inv.asDiagonal() * e.vectors.transpose();
}

// Covariance (sum_{l>=1} h_l S^l)^2 over a product shift; taps index from
// l = 1, so a constant term never hides a singular polynomial.
inline Matrix poly_cov_root(const Gso& s, const Vector& coeffs_from_l1) {
  if (coeffs_from_l1.size() < 1)
    throw Error(Errc::invalid_argument, "need at least one tap");
  Vector full(coeffs_from_l1.size() + 1);
  full(0) = 0.0;
  full.tail(coeffs_from_l1.size()) = coeffs_from_l1;
  Matrix g = detail::poly_apply(s.weights, full);
  Vector a = eig_sym(g).values.cwiseAbs();
  if (a.minCoeff() < 1e-8 * a.maxCoeff())
    throw Error(Errc::singular_filter,
                "polynomial covariance factor is singular for this shift");
  return g;
}

inline SignalTensor generate_polycov(const Gso& s, long P, long Q,
                                     const Vector& coeffs_from_l1, long R,
                                     std::uint64_t seed) {
  if (P * Q != s.n)
    throw Error(Errc::dimension_mismatch,
                "product shift is " + std::to_string(s.n) + "x" +
                    std::to_string(s.n) + ", expected " + std::to_string(P * Q));
  if (R < 1) throw Error(Errc::invalid_argument, "need at least one realization");
  Matrix g = poly_cov_root(s, coeffs_from_l1);
  return detail::sample_from_cov_root(g, P, Q, R, GeneratorKind::poly_cov, seed);
}

}  // namespace prodgraph
