#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "prodgraph/covariance.hpp"
#include "prodgraph/graph_gen.hpp"
#include "prodgraph/metrics.hpp"
#include "prodgraph/signal.hpp"
#include "prodgraph/solver.hpp"

using namespace prodgraph;

TEST_CASE("simplex projection hand cases") {
  Vector v(2);
  v << 2, 0;
  detail::project_simplex(v);
  CHECK(std::abs(v(0) - 1.0) < 1e-14);
  CHECK(v(1) == 0.0);

  Vector w(2);
  w << 0.3, 0.3;
  detail::project_simplex(w);
  CHECK(std::abs(w(0) - 0.5) < 1e-14);
  CHECK(std::abs(w(1) - 0.5) < 1e-14);

  Vector u(3);
  u << 1, 1, 1;
  detail::project_simplex(u, 1.0);
  CHECK(std::abs(u.sum() - 1.0) < 1e-14);
  CHECK(std::abs(u(0) - 1.0 / 3.0) < 1e-14);
}

namespace {
Matrix random_sym(long n, std::uint64_t seed) {
  Matrix m = standard_normal_matrix(n, n, seed, /*stream=*/7);
  return ((m + m.transpose()) / 2.0).eval();
}

bool in_shift_set(const Matrix& s, NormMode mode, double tol) {
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  if (s.diagonal().cwiseAbs().maxCoeff() > tol) return false;
  if (s.minCoeff() < -tol) return false;
  if (mode == NormMode::first_row_unit)
    return std::abs(s.row(0).sum() - 1.0) <= tol;
  for (long i = 0; i < s.rows(); ++i)
    if (std::abs(s.row(i).sum() - 1.0) > tol) return false;
  return true;
}
}  // namespace

TEST_CASE("shift-set projection lands in the set and is idempotent") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Matrix a = random_sym(5, seed);
    Matrix x = a;
    detail::project_gso_set(x, NormMode::first_row_unit);
    CHECK(in_shift_set(x, NormMode::first_row_unit, 1e-12));
    Matrix x2 = x;
    detail::project_gso_set(x2, NormMode::first_row_unit);
    CHECK((x2 - x).cwiseAbs().maxCoeff() < 1e-13);

    Matrix y = a;
    detail::project_gso_set(y, NormMode::row_stochastic);
    CHECK(in_shift_set(y, NormMode::row_stochastic, 1e-8));
    Matrix y2 = y;
    detail::project_gso_set(y2, NormMode::row_stochastic);
    CHECK((y2 - y).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("first-row-unit projection satisfies the variational inequality") {
  const long n = 4;
  Matrix z = random_sym(n, 11);
  Matrix x = z;
  detail::project_gso_set(x, NormMode::first_row_unit);
  // candidate feasible points
  std::vector<Matrix> feas;
  Matrix u = Matrix::Constant(n, n, 1.0 / static_cast<double>(n - 1));
  u.diagonal().setZero();
  feas.push_back(u);
  for (std::uint64_t s : {21ull, 22ull, 23ull}) {
    Matrix f = random_sym(n, s);
    detail::project_gso_set(f, NormMode::first_row_unit);
    feas.push_back(f);
  }
  for (const Matrix& f : feas) {
    const double ip = ((z - x).cwiseProduct(f - x)).sum();
    CHECK(ip <= 1e-10);
  }
}

TEST_CASE("weighted shrinkage meets the radius with a single multiplier") {
  Eigen::ArrayXd t(2), d(2);
  t << 3, 4;
  d << 1, 1;
  detail::shrink_weighted(t, d, 0.0, 1.0);
  CHECK(std::abs(t(0) - 0.6) < 1e-10);
  CHECK(std::abs(t(1) - 0.8) < 1e-10);

  Eigen::ArrayXd t2(3), d2(3);
  t2 << 1, 1, 5;
  d2 << 4, 1, 0;
  detail::shrink_weighted(t2, d2, 1e-300, 1.0);
  CHECK(std::abs((d2 * t2 * t2).sum() - 1.0) < 1e-9);
  CHECK(t2(2) == 5.0);  // free coordinate untouched
  // both shrunk coordinates share one multiplier
  const double mu0 = (1.0 - t2(0)) / (4.0 * t2(0));
  const double mu1 = (1.0 - t2(1)) / (1.0 * t2(1));
  CHECK(std::abs(mu0 - mu1) < 1e-8);

  Eigen::ArrayXd t3(3);
  t3 << 1, 1, 5;
  detail::shrink_weighted(t3, d2, 1e-300, 0.0);
  CHECK(t3(0) == 0.0);
  CHECK(t3(1) == 0.0);
  CHECK(t3(2) == 5.0);

  // already inside: untouched
  Eigen::ArrayXd t4(2);
  t4 << 0.1, 0.1;
  Eigen::ArrayXd d4(2);
  d4 << 1, 1;
  detail::shrink_weighted(t4, d4, 0.0, 1.0);
  CHECK(t4(0) == 0.1);
}

TEST_CASE("commutator ball projection is an exact metric projection") {
  Gso g = erdos_renyi_connected(5, 0.5, 40);
  PolyFilter h = random_filter(g, 3, 41);
  Matrix c = h.matrix * h.matrix;
  c /= c.norm();
  detail::SpectralBall ball(c, 0.05);

  Matrix z = random_sym(5, 50);
  Matrix x = z;
  ball.project(x);
  CHECK(ball.residual(x) <= 0.05 + 1e-9);

  // variational inequality against points produced inside the ball
  for (std::uint64_t s : {51ull, 52ull, 53ull}) {
    Matrix w = random_sym(5, s);
    ball.project(w);
    const double ip = ((z - x).cwiseProduct(w - x)).sum();
    CHECK(ip <= 1e-9);
  }

  // interior points are fixed
  Matrix inside = 1e-4 * random_sym(5, 54);
  Matrix inside2 = inside;
  ball.project(inside2);
  CHECK((inside - inside2).cwiseAbs().maxCoeff() < 1e-12);

  // zero radius projects onto the commutant
  detail::SpectralBall tight(c, 0.0);
  Matrix y = random_sym(5, 55);
  tight.project(y);
  CHECK(tight.residual(y) < 1e-10);
  CHECK((c * y - y * c).norm() < 1e-10);
}

TEST_CASE("the general-operator ball agrees with the spectral one") {
  Gso g = erdos_renyi_connected(4, 0.6, 60);
  PolyFilter h = random_filter(g, 3, 61);
  Matrix c = h.matrix * h.matrix;
  c /= c.norm();
  const double eps = 0.03;
  detail::SpectralBall sball(c, eps);
  auto apply = [&](const Matrix& b) { return (c * b - b * c).eval(); };
  detail::GramBall gball(4, apply, eps);

  for (std::uint64_t s : {70ull, 71ull, 72ull}) {
    Matrix z = random_sym(4, s);
    CHECK(std::abs(sball.residual(z) - gball.residual(z)) < 1e-8);
    Matrix a = z, b = z;
    sball.project(a);
    gball.project(b);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("symmetric coordinates are an isometry") {
  auto apply = [](const Matrix& b) { return b; };
  detail::GramBall ball(4, apply, 1.0);
  Matrix s = random_sym(4, 80);
  Vector x = ball.coords(s);
  CHECK(std::abs(x.norm() - s.norm()) < 1e-12);
  Matrix back = ball.from_coords(x);
  CHECK((back - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity covariance minimizes the entry sum") {
  Matrix c = Matrix::Identity(5, 5);
  SolverOptions opts;
  opts.norm_mode = NormMode::first_row_unit;
  SolveReport rep = solve_l1_commute(c, opts);
  CHECK(rep.status == SolveStatus::optimal);
  CHECK(std::abs(rep.objective - 2.0) < 1e-4);
  REQUIRE(rep.s_full.has_value());
  CHECK(in_shift_set(rep.s_full->weights, NormMode::first_row_unit, 1e-9));

  opts.norm_mode = NormMode::row_stochastic;
  SolveReport rs = solve_l1_commute(c, opts);
  CHECK(rs.status == SolveStatus::optimal);
  CHECK(std::abs(rs.objective - 5.0) < 1e-4);
}

TEST_CASE("a diagonal covariance with distinct entries is infeasible") {
  Matrix c = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
  SolverOptions opts;
  opts.epsilon = 0.05;
  opts.epsilon_relative = true;
  SolveReport rep = solve_l1_commute(c, opts);
  CHECK(rep.status == SolveStatus::infeasible);
}

TEST_CASE("estimates are invariant to covariance rescaling") {
  Gso g = erdos_renyi_connected(5, 0.5, 90);
  PolyFilter h = random_filter(g, 3, 91);
  Matrix c = h.matrix * h.matrix;
  SolverOptions opts;
  opts.epsilon = 0.05 * c.norm();
  SolveReport a = solve_l1_commute(c, opts);
  SolverOptions scaled = opts;
  scaled.epsilon = opts.epsilon * 7.5;
  // scaling the input perturbs the normalized iterates by rounding in the
  // scaled entries, so identity holds only to machine-level slack
  SolveReport b = solve_l1_commute((7.5 * c).eval(), scaled);
  CHECK((a.s_full->weights - b.s_full->weights).cwiseAbs().maxCoeff() < 1e-12);

  // relative radius expresses the same solve without pre-scaling
  SolverOptions rel = opts;
  rel.epsilon = 0.05;
  rel.epsilon_relative = true;
  SolveReport r = solve_l1_commute(c, rel);
  CHECK((a.s_full->weights - r.s_full->weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("repeat solves are bit-identical") {
  Gso g = erdos_renyi_connected(6, 0.4, 100);
  PolyFilter h = random_filter(g, 3, 101);
  Matrix c = h.matrix * h.matrix;
  SolverOptions opts;
  opts.epsilon = 0.02;
  opts.epsilon_relative = true;
  SolveReport a = solve_l1_commute(c, opts);
  SolveReport b = solve_l1_commute(c, opts);
  CHECK((a.s_full->weights - b.s_full->weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("solver input validation") {
  SolverOptions opts;
  Matrix bad(2, 3);
  bad.setZero();
  CHECK_THROWS_AS(solve_l1_commute(bad, opts), Error);
  Matrix asym(3, 3);
  asym.setZero();
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(solve_l1_commute(asym, opts), Error);
  SolverOptions neg;
  neg.epsilon = -1.0;
  CHECK_THROWS_AS(solve_l1_commute(Matrix::Identity(3, 3), neg), Error);
  SolverOptions binary;
  binary.norm_mode = NormMode::binary_unnormalized;
  CHECK_THROWS_AS(solve_l1_commute(Matrix::Identity(3, 3), binary), Error);
  CHECK_THROWS_AS(solve_kst(Matrix::Identity(6, 6), 3, 3, opts), Error);
}

TEST_CASE("factor alternation on an identity covariance settles at once") {
  Matrix c = Matrix::Identity(6, 6);
  SolverOptions opts;
  SolveReport rep = solve_kst(c, 2, 3, opts);
  CHECK(rep.status == SolveStatus::optimal);
  REQUIRE(rep.alt_rounds.has_value());
  CHECK(*rep.alt_rounds <= 2);
  REQUIRE(rep.s_p.has_value());
  REQUIRE(rep.s_q.has_value());
  CHECK(std::abs(rep.s_p->weights.row(0).sum() - 1.0) < 1e-9);
  CHECK(std::abs(rep.s_q->weights.row(0).sum() - 1.0) < 1e-9);
}

TEST_CASE("one factor subproblem with the true partner recovers the factor") {
  Gso sp = renormalize(erdos_renyi_connected(4, 0.4, 110),
                       NormMode::first_row_unit);
  Gso sq = renormalize(erdos_renyi_connected(4, 0.4, 111),
                       NormMode::first_row_unit);
  PolyFilter hp = random_filter(sp, 3, 112);
  PolyFilter hq = random_filter(sq, 3, 113);
  CovarianceSet cov = analytic_cov(hp, hq, /*include_full=*/true);
  Matrix cn = *cov.c_y;
  cn /= cn.norm();
  SolverOptions opts;
  detail::DrOutcome out = detail::solve_kst_factor(
      cn, 4, 4, sq.weights, /*solving_p=*/true, /*eps_n=*/0.0,
      detail::dr_gamma(4), opts);
  CHECK(out.status == SolveStatus::optimal);
  EvalResult f = fscore(binarize(out.x), binarize(sp.weights));
  CHECK(f.fscore == 1.0);
}
