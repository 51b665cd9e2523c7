#pragma once

#include <cstdint>
#include <vector>

#include "prodgraph/gso.hpp"
#include "prodgraph/rng.hpp"

namespace prodgraph {

// Erdos-Renyi draw, pure in (n, p, seed). Edge (i, j), i < j, is present iff
// the uniform draw at that pair's index falls below p; pair indices enumerate
// (0,1), (0,2), ..., (n-2,n-1).
inline Gso erdos_renyi(long n, double p, std::uint64_t seed) {
  if (n < 2) throw Error(Errc::invalid_argument, "erdos_renyi needs n >= 2");
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(Errc::invalid_argument, "edge probability must lie in [0, 1]");
  CounterRng rng(seed, /*stream=*/0x45525f47ULL);
  Matrix w = Matrix::Zero(n, n);
  std::uint64_t k = 0;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j, ++k)
      if (rng.uniform(k) < p) w(i, j) = w(j, i) = 1.0;
  return Gso{n, std::move(w), NormMode::binary_unnormalized};
}

inline bool is_connected(const Matrix& w) {
  const long n = w.rows();
  if (n == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<long> stack{0};
  seen[0] = 1;
  long count = 1;
  while (!stack.empty()) {
    const long u = stack.back();
    stack.pop_back();
    for (long v = 0; v < n; ++v)
      if (!seen[static_cast<std::size_t>(v)] && w(u, v) != 0.0) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

inline bool is_connected(const Gso& g) { return is_connected(g.weights); }

// Redraws until the sampled graph is connected. Each attempt derives its own
// seed so the sequence is reproducible; disconnected draws cost nothing but
// a retry. A complete graph fallback is unreachable for sane (n, p) but keeps
// the function total.
inline Gso erdos_renyi_connected(long n, double p, std::uint64_t seed,
                                 int max_attempts = 1000) {
  CounterRng deriver(seed, /*stream=*/0x45525f43ULL);
  for (int a = 0; a < max_attempts; ++a) {
    Gso g = erdos_renyi(n, p, deriver.raw(static_cast<std::uint64_t>(a)));
    if (is_connected(g)) return g;
  }
  Matrix w = Matrix::Ones(n, n);
  w.diagonal().setZero();
  return Gso{n, std::move(w), NormMode::binary_unnormalized};
}

// Renormalizes a shift operator into the requested mode.
inline Gso renormalize(const Gso& g, NormMode mode) {
  Matrix w = g.weights;
  if (mode == NormMode::row_stochastic) {
    // Symmetric scaling D^{-1/2} W D^{-1/2} is not row-stochastic in general;
    // divide each row by its sum and resymmetrize only when degrees agree.
    for (long i = 0; i < w.rows(); ++i) {
      const double s = w.row(i).sum();
      if (s <= 0.0)
        throw Error(Errc::normalization_violated,
                    "row " + std::to_string(i) + " has zero degree", i);
      w.row(i) /= s;
    }
    w = ((w + w.transpose()) / 2.0).eval();
    for (long i = 0; i < w.rows(); ++i) {
      const double s = w.row(i).sum();
      if (std::abs(s - 1.0) > detail::kGsoTol)
        throw Error(Errc::normalization_violated,
                    "graph does not admit a symmetric row-stochastic form", i);
    }
  } else if (mode == NormMode::first_row_unit) {
    const double s = w.row(0).sum();
    if (s <= 0.0)
      throw Error(Errc::normalization_violated, "node 0 has zero degree", 0);
    w /= s;
  }
  return validate_gso(std::move(w), mode);
}

}  // namespace prodgraph
