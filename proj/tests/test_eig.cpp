#include <catch2/catch_amalgamated.hpp>

#include "prodgraph/eig.hpp"
#include "prodgraph/graph_gen.hpp"

using namespace prodgraph;

TEST_CASE("symmetric eigendecomposition reconstructs and orders") {
  Gso g = erdos_renyi_connected(8, 0.4, 5);
  EigPair e = eig_sym(g.weights);
  const long n = 8;

  Matrix recon =
      e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  CHECK((recon - g.weights).cwiseAbs().maxCoeff() < 1e-9);

  Matrix gram = e.vectors.transpose() * e.vectors;
  CHECK((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);

  for (long i = 1; i < n; ++i) CHECK(e.values(i) >= e.values(i - 1));
}

TEST_CASE("eigenvector signs are canonical") {
  Gso g = erdos_renyi_connected(6, 0.5, 17);
  EigPair a = eig_sym(g.weights);
  EigPair b = eig_sym((g.weights * 2.0).eval());
  // same eigenbasis up to scaling of values; sign convention must agree
  CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() < 1e-9);
  for (long j = 0; j < 6; ++j) {
    long i = 0;
    while (i < 6 && std::abs(a.vectors(i, j)) <= 1e-10) ++i;
    REQUIRE(i < 6);
    CHECK(a.vectors(i, j) > 0.0);
  }
}

TEST_CASE("asymmetric input is rejected") {
  Matrix m(2, 2);
  m << 0, 1, 2, 0;
  CHECK_THROWS_AS(eig_sym(m), Error);
}
