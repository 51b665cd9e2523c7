#pragma once

#include <cstdint>
#include <limits>

#include "prodgraph/eig.hpp"
#include "prodgraph/gso.hpp"
#include "prodgraph/rng.hpp"

namespace prodgraph {

// Polynomial graph filter H = sum_{l=0}^{L-1} h_l S^l. Symmetric because S is.
struct PolyFilter {
  Gso shift;
  Vector coeffs;
  Matrix matrix;
};

namespace detail {
inline constexpr double kCondLimit = 1e6;

inline Matrix poly_apply(const Matrix& s, const Vector& coeffs) {
  const long n = s.rows();
  Matrix acc = Matrix::Identity(n, n);
  Matrix h = coeffs(0) * acc;
  for (long l = 1; l < coeffs.size(); ++l) {
    acc = (acc * s).eval();
    h.noalias() += coeffs(l) * acc;
  }
  return h;
}

// Condition number through |eigenvalues|; infinite when singular.
inline double sym_cond(const Matrix& h) {
  const Vector a = eig_sym(h).values.cwiseAbs();
  const double mx = a.maxCoeff(), mn = a.minCoeff();
  if (mn <= 0.0) return std::numeric_limits<double>::infinity();
  return mx / mn;
}
}  // namespace detail

inline PolyFilter make_filter(const Gso& shift, const Vector& coeffs) {
  if (coeffs.size() < 1)
    throw Error(Errc::invalid_argument, "a filter needs at least one tap");
  Matrix h = detail::poly_apply(shift.weights, coeffs);
  const double cond = detail::sym_cond(h);
  if (!(cond <= detail::kCondLimit))
    throw Error(Errc::ill_conditioned,
                "filter condition number " + std::to_string(cond) +
                    " exceeds " + std::to_string(detail::kCondLimit));
  return PolyFilter{shift, coeffs, std::move(h)};
}

// Draws taps uniformly from [-1, 1], redrawing from a fresh substream until
// the filter is well conditioned, then rescales to ||H||_F = sqrt(n).
inline PolyFilter random_filter(const Gso& shift, long L, std::uint64_t seed,
                                int max_attempts = 100) {
  if (L < 1) throw Error(Errc::invalid_argument, "filter length must be >= 1");
  CounterRng base(seed, /*stream=*/0x46494c54ULL);
  const long n = shift.n;
  for (int a = 0; a < max_attempts; ++a) {
    CounterRng rng = base.split(static_cast<std::uint64_t>(a));
    Vector coeffs(L);
    for (long l = 0; l < L; ++l)
      coeffs(l) = 2.0 * rng.uniform(static_cast<std::uint64_t>(l)) - 1.0;
    Matrix h = detail::poly_apply(shift.weights, coeffs);
    const double cond = detail::sym_cond(h);
    if (!(cond <= detail::kCondLimit)) continue;
    const double fn = h.norm();
    const double scale = std::sqrt(static_cast<double>(n)) / fn;
    coeffs *= scale;
    h *= scale;
    return PolyFilter{shift, std::move(coeffs), std::move(h)};
  }
  throw Error(Errc::exhausted_retries,
              "no well-conditioned filter in " + std::to_string(max_attempts) +
                  " attempts");
}

}  // namespace prodgraph
