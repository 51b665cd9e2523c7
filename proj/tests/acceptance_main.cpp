// Acceptance suite: ten numbered checks, one [PASS]/[FAIL] line each,
// nonzero exit when any check fails. Checks 1-3 are closed-form identity
// sweeps, 4-8 are recovery and trend benchmarks at fixed seeds, 9 is the
// solver-versus-oracle comparison, 10 is output determinism.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "prodgraph/experiment.hpp"

using namespace prodgraph;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void record(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double rel_err(const Matrix& a, const Matrix& b) {
  const double d = b.norm();
  return (a - b).norm() / (d > 0 ? d : 1.0);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  long n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      s += x;
      ++n;
    }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---- checks 1-3: covariance identities over one shared sweep ----

void check_identities() {
  Timer timer;
  double worst1 = 0, worst2 = 0, worst3 = 0;
  std::string err;
  try {
    for (int i = 0; i < 200; ++i) {
      const long P = 3 + (i % 6);
      const long Q = 3 + ((i / 6) % 6);
      const long L = 1 + (i % 3);
      Gso sp = erdos_renyi(P, 0.3, 10000 + static_cast<std::uint64_t>(i));
      Gso sq = erdos_renyi(Q, 0.3, 20000 + static_cast<std::uint64_t>(i));
      PolyFilter hp = random_filter(sp, L, 30000 + static_cast<std::uint64_t>(i));
      PolyFilter hq = random_filter(sq, L, 40000 + static_cast<std::uint64_t>(i));
      CovarianceSet cov = analytic_cov(hp, hq, /*include_full=*/true);

      // independent route: cov(vec Y) = (Hq x Hp)(Hq x Hp)^T, marginals by
      // partial trace
      Matrix m = kron(hq.matrix, hp.matrix);
      Matrix cy_direct = m * m.transpose();
      worst1 = std::max(worst1, rel_err(cov.c_p, partial_trace_q(cy_direct, P, Q)));
      worst1 = std::max(worst1, rel_err(cov.c_q, partial_trace_p(cy_direct, P, Q)));
      worst1 = std::max(worst1, rel_err(*cov.c_y, cy_direct));

      const double tp = (hp.matrix * hp.matrix).trace();
      const double tq = (hq.matrix * hq.matrix).trace();
      worst2 = std::max(worst2,
                        rel_err(kron(cov.c_q, cov.c_p), (tp * tq) * (*cov.c_y)));

      Matrix v = kron(eig_sym(sq.weights).vectors, eig_sym(sp.weights).vectors);
      Matrix rot = v.transpose() * (*cov.c_y) * v;
      Matrix off = rot;
      off.diagonal().setZero();
      const double bound =
          1e-8 * rot.trace() / static_cast<double>(P * Q);
      worst3 = std::max(worst3, off.cwiseAbs().maxCoeff() / bound);
    }
  } catch (const std::exception& e) {
    err = e.what();
  }
  const double secs = timer.s();
  if (!err.empty()) {
    record(1, "dimension-wise covariance identities", false, "threw: " + err);
    record(2, "joint-vs-marginal covariance relation", false, "threw: " + err);
    record(3, "shared eigenbasis diagonalization", false, "threw: " + err);
    return;
  }
  record(1, "dimension-wise covariance identities",
         worst1 < 1e-10 && secs < 10.0,
         "max rel err " + fmt(worst1) + " over 200 draws in " + fmt(secs) +
             "s (need < 1e-10, < 10s)");
  record(2, "joint-vs-marginal covariance relation", worst2 < 1e-10,
         "max rel err " + fmt(worst2) + " (need < 1e-10)");
  record(3, "shared eigenbasis diagonalization", worst3 < 1.0,
         "worst off-diagonal at " + fmt(worst3) +
             " of the per-entry budget (need < 1)");
}

// ---- check 4: perfect-covariance recovery ----

void check_perfect_recovery() {
  Timer timer;
  std::string err;
  std::vector<double> sep_means, kst_means;
  long agree = 0, total = 0;
  try {
    ExperimentConfig cfg;
    cfg.output_dir = "unused";
    SolverOptions opts;  // epsilon 0
    const long sizes[] = {4, 6, 8};
    for (int si = 0; si < 3; ++si) {
      const long n = sizes[si];
      std::vector<double> fs_sep, fs_kst;
      for (long t = 0; t < 20; ++t) {
        const std::uint64_t seed =
            detail::derive_seed(0xACC4, si, 0, 0, t);
        detail::TrialData td = detail::make_trial_data(
            cfg, n, n, kAnalyticSentinel, seed);
        SolveReport sep = solve_sepkst(td.cov.c_p, td.cov.c_q, opts);
        SolveReport kst = solve_kst(*td.cov.c_y, n, n, opts);
        ProductEval es =
            eval_product(sep.s_p->weights, sep.s_q->weights, td.sp.weights,
                         td.sq.weights, ProductKind::kronecker, nullptr);
        ProductEval ek =
            eval_product(kst.s_p->weights, kst.s_q->weights, td.sp.weights,
                         td.sq.weights, ProductKind::kronecker, nullptr);
        fs_sep.push_back(sep.status == SolveStatus::infeasible ? 0.0
                                                               : es.prod.fscore);
        fs_kst.push_back(kst.status == SolveStatus::infeasible ? 0.0
                                                               : ek.prod.fscore);
        Matrix prod_sep = product_weights(binarize(sep.s_p->weights),
                                          binarize(sep.s_q->weights),
                                          ProductKind::kronecker);
        Matrix prod_kst = product_weights(binarize(kst.s_p->weights),
                                          binarize(kst.s_q->weights),
                                          ProductKind::kronecker);
        if ((prod_sep - prod_kst).cwiseAbs().maxCoeff() == 0.0) ++agree;
        ++total;
      }
      sep_means.push_back(mean(fs_sep));
      kst_means.push_back(mean(fs_kst));
    }
  } catch (const std::exception& e) {
    err = e.what();
  }
  const double secs = timer.s();
  if (!err.empty()) {
    record(4, "perfect-covariance recovery", false, "threw: " + err);
    return;
  }
  const double min_sep = *std::min_element(sep_means.begin(), sep_means.end());
  const double min_kst = *std::min_element(kst_means.begin(), kst_means.end());
  const double agree_frac =
      static_cast<double>(agree) / static_cast<double>(total);
  const bool pass = min_sep >= 0.95 && min_kst >= 0.95 &&
                    agree_frac >= 0.95 && secs < 300.0;
  record(4, "perfect-covariance recovery", pass,
         "mean F by size: sepkst [" + fmt(sep_means[0]) + ", " +
             fmt(sep_means[1]) + ", " + fmt(sep_means[2]) + "], kst [" +
             fmt(kst_means[0]) + ", " + fmt(kst_means[1]) + ", " +
             fmt(kst_means[2]) + "], support agreement " + fmt(agree_frac) +
             ", " + fmt(secs) + "s (need >= 0.95, >= 0.95, < 300s)");
}

// ---- checks 5-6: sample-covariance ordering and commutativity trend ----

void check_sample_trends() {
  std::string err;
  // means indexed by [R index][method: 0 st, 1 kst, 2 sepkst]
  double f_mean[2][3] = {{0, 0, 0}, {0, 0, 0}};
  double commut_sep[2] = {0, 0};
  try {
    ExperimentConfig cfg;
    cfg.output_dir = "unused";
    SolverOptions opts;
    opts.epsilon = 0.05;
    opts.epsilon_relative = true;
    const long counts[] = {200, 1000};
    for (int ri = 0; ri < 2; ++ri) {
      const long R = counts[ri];
      std::vector<double> f_st, f_kst, f_sep, cm_sep;
      for (long t = 0; t < 20; ++t) {
        const std::uint64_t seed = detail::derive_seed(0xACC5, 0, ri, 0, t);
        detail::TrialData td = detail::make_trial_data(cfg, 4, 4, R, seed);
        const Matrix& cy = *td.cov.c_y;
        Matrix truth = product_weights(td.sp.weights, td.sq.weights,
                                       ProductKind::kronecker);

        SolveReport st = solve_st(cy, opts);
        f_st.push_back(st.status == SolveStatus::infeasible
                           ? 0.0
                           : fscore(binarize(st.s_full->weights),
                                    binarize(truth))
                                 .fscore);

        SolveReport kst = solve_kst(cy, 4, 4, opts);
        ProductEval ek =
            eval_product(kst.s_p->weights, kst.s_q->weights, td.sp.weights,
                         td.sq.weights, ProductKind::kronecker, nullptr);
        f_kst.push_back(kst.status == SolveStatus::infeasible ? 0.0
                                                              : ek.prod.fscore);

        SolveReport sep = solve_sepkst(td.cov.c_p, td.cov.c_q, opts);
        ProductEval es =
            eval_product(sep.s_p->weights, sep.s_q->weights, td.sp.weights,
                         td.sq.weights, ProductKind::kronecker, &cy);
        f_sep.push_back(sep.status == SolveStatus::infeasible ? 0.0
                                                              : es.prod.fscore);
        if (sep.status != SolveStatus::infeasible) cm_sep.push_back(es.commut);
      }
      f_mean[ri][0] = mean(f_st);
      f_mean[ri][1] = mean(f_kst);
      f_mean[ri][2] = mean(f_sep);
      commut_sep[ri] = mean(cm_sep);
    }
  } catch (const std::exception& e) {
    err = e.what();
  }
  if (!err.empty()) {
    record(5, "sample-covariance method ordering", false, "threw: " + err);
    record(6, "commutativity falls as samples grow", false, "threw: " + err);
    return;
  }
  const bool order_ok =
      f_mean[0][2] >= f_mean[0][1] && f_mean[0][2] >= f_mean[0][0] &&
      f_mean[1][2] >= f_mean[1][1] && f_mean[1][2] >= f_mean[1][0];
  const bool grow_ok = f_mean[1][2] > f_mean[0][2];
  record(5, "sample-covariance method ordering", order_ok && grow_ok,
         "mean F at R=200 [st " + fmt(f_mean[0][0]) + ", kst " +
             fmt(f_mean[0][1]) + ", sepkst " + fmt(f_mean[0][2]) +
             "], R=1000 [st " + fmt(f_mean[1][0]) + ", kst " +
             fmt(f_mean[1][1]) + ", sepkst " + fmt(f_mean[1][2]) +
             "] (need sepkst >= both at each R, and sepkst rising with R)");
  record(6, "commutativity falls as samples grow",
         commut_sep[1] < commut_sep[0],
         "sepkst mean residual " + fmt(commut_sep[0]) + " at R=200 vs " +
             fmt(commut_sep[1]) + " at R=1000 (need a decrease)");
}

// ---- check 7: runtime ordering ----

void check_runtime_order() {
  std::string err;
  double med_st = 0, med_kst = 0, med_sep = 0;
  try {
    ExperimentConfig cfg;
    cfg.output_dir = "unused";
    SolverOptions opts;  // analytic regime
    std::vector<double> t_st, t_kst, t_sep;
    for (long t = 0; t < 5; ++t) {
      const std::uint64_t seed = detail::derive_seed(0xACC7, 0, 0, 0, t);
      detail::TrialData td =
          detail::make_trial_data(cfg, 6, 6, kAnalyticSentinel, seed);
      t_st.push_back(solve_st(*td.cov.c_y, opts).wall_time_s);
      t_kst.push_back(solve_kst(*td.cov.c_y, 6, 6, opts).wall_time_s);
      t_sep.push_back(solve_sepkst(td.cov.c_p, td.cov.c_q, opts).wall_time_s);
    }
    med_st = median(t_st);
    med_kst = median(t_kst);
    med_sep = median(t_sep);
  } catch (const std::exception& e) {
    err = e.what();
  }
  if (!err.empty()) {
    record(7, "solver runtime ordering", false, "threw: " + err);
    return;
  }
  record(7, "solver runtime ordering", med_sep < med_kst && med_kst < med_st,
         "median seconds: sepkst " + fmt(med_sep) + " < kst " + fmt(med_kst) +
             " < st " + fmt(med_st) + " (need this ordering)");
}

// ---- check 8: polynomial-covariance robustness ----

void check_polycov_recovery() {
  std::string err;
  std::vector<double> means;
  try {
    ExperimentConfig cfg;
    cfg.output_dir = "unused";
    cfg.generator = GeneratorKind::poly_cov;
    SolverOptions opts;
    // tuned for this regime: best joint means over a scan of relative
    // radii {0.005..0.5}, the smallest with no infeasible draws
    opts.epsilon = 0.03;
    opts.epsilon_relative = true;
    const long sizes[] = {4, 6};
    for (int si = 0; si < 2; ++si) {
      const long n = sizes[si];
      std::vector<double> f;
      for (long t = 0; t < 20; ++t) {
        const std::uint64_t seed = detail::derive_seed(0xACC8, si, 0, 0, t);
        detail::TrialData td = detail::make_trial_data(cfg, n, n, 10000, seed);
        SolveReport sep = solve_sepkst(td.cov.c_p, td.cov.c_q, opts);
        ProductEval es =
            eval_product(sep.s_p->weights, sep.s_q->weights, td.sp.weights,
                         td.sq.weights, ProductKind::kronecker, nullptr);
        f.push_back(sep.status == SolveStatus::infeasible ? 0.0
                                                          : es.prod.fscore);
      }
      means.push_back(mean(f));
    }
  } catch (const std::exception& e) {
    err = e.what();
  }
  if (!err.empty()) {
    record(8, "polynomial-covariance recovery", false, "threw: " + err);
    return;
  }
  record(8, "polynomial-covariance recovery",
         means[0] >= 0.8 && means[1] >= 0.8,
         "sepkst mean F [4x4: " + fmt(means[0]) + ", 6x6: " + fmt(means[1]) +
             "] at R=1e4, tuned eps 0.03 rel (need >= 0.8 each)");
}

// ---- check 9: splitting solver vs small-instance oracle ----

void check_solver_oracle() {
  std::string err;
  long mismatches = 0, infeasible_both = 0, compared = 0;
  double worst_gap = 0, worst_feas = 0;
  std::string first_mismatch;
  try {
    for (int i = 0; i < 100; ++i) {
      const long n = 2 + (i % 5);
      const bool rowstoch = (i % 4 == 3);
      Gso g;
      if (rowstoch) {
        // a cycle renormalizes to row-stochastic for every n
        Matrix w = Matrix::Zero(n, n);
        for (long k = 0; k < n; ++k) {
          w(k, (k + 1) % n) = 1.0;
          w((k + 1) % n, k) = 1.0;
        }
        g = renormalize(Gso{n, w, NormMode::binary_unnormalized},
                        NormMode::row_stochastic);
      } else {
        g = renormalize(
            erdos_renyi_connected(n, 0.5, 9000 + static_cast<std::uint64_t>(i)),
            NormMode::first_row_unit);
      }
      PolyFilter h =
          random_filter(g, 3, 9500 + static_cast<std::uint64_t>(i));
      Matrix c = h.matrix * h.matrix;
      SolverOptions opts;
      opts.norm_mode =
          rowstoch ? NormMode::row_stochastic : NormMode::first_row_unit;
      if (i % 2 == 1) {
        opts.epsilon = 0.05;
        opts.epsilon_relative = true;
      }
      SolveReport ref = reference_solve_small(c, opts);
      SolveReport dr = solve_l1_commute(c, opts);
      if (ref.status == SolveStatus::infeasible ||
          dr.status == SolveStatus::infeasible) {
        if (ref.status == dr.status) ++infeasible_both;
        else {
          ++mismatches;
          if (first_mismatch.empty())
            first_mismatch = "instance " + std::to_string(i) +
                             " status ref=" + status_name(ref.status) +
                             " dr=" + status_name(dr.status);
        }
        continue;
      }
      if (ref.status != SolveStatus::optimal ||
          dr.status != SolveStatus::optimal) {
        ++mismatches;
        if (first_mismatch.empty())
          first_mismatch = "instance " + std::to_string(i) +
                           " status ref=" + status_name(ref.status) +
                           " dr=" + status_name(dr.status);
        continue;
      }
      ++compared;
      const double gap = std::abs(ref.objective - dr.objective);
      worst_gap = std::max(worst_gap, gap);
      const double eps_eff =
          opts.epsilon_relative ? opts.epsilon * c.norm() : opts.epsilon;
      const double feas =
          std::max(0.0, dr.commut_residual - eps_eff) / c.norm();
      worst_feas = std::max(worst_feas, feas);
      if (gap > 1e-5 || feas > 1e-6) {
        ++mismatches;
        if (first_mismatch.empty())
          first_mismatch = "instance " + std::to_string(i) + " gap " +
                           fmt(gap) + " feas " + fmt(feas);
      }
    }
  } catch (const std::exception& e) {
    err = e.what();
  }
  if (!err.empty()) {
    record(9, "splitting solver matches the oracle", false, "threw: " + err);
    return;
  }
  std::string detail = std::to_string(compared) + " optimal + " +
                       std::to_string(infeasible_both) +
                       " infeasible instances, worst objective gap " +
                       fmt(worst_gap) + ", worst feasibility excess " +
                       fmt(worst_feas) + " (need <= 1e-5, <= 1e-6)";
  if (mismatches) {
    detail += "; " + std::to_string(mismatches) +
              " mismatches, first: " + first_mismatch;
  }
  record(9, "splitting solver matches the oracle", mismatches == 0, detail);
}

// ---- check 10: determinism ----

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// results.csv with the wall-time cell blanked
std::vector<std::string> masked_results(const fs::path& p) {
  std::vector<std::string> out;
  for (std::string& line : read_lines(p)) {
    const auto cut = line.rfind(',');
    out.push_back(cut == std::string::npos ? line : line.substr(0, cut));
  }
  return out;
}

std::vector<std::string> masked_lines(const fs::path& p,
                                      std::initializer_list<const char*> drop) {
  std::vector<std::string> out;
  for (std::string& line : read_lines(p)) {
    bool keep = true;
    for (const char* d : drop)
      if (line.find(d) != std::string::npos) keep = false;
    if (keep) out.push_back(line);
  }
  return out;
}

// summary.csv keeping everything before the wall-time statistics columns
std::vector<std::string> masked_summary(const fs::path& p) {
  std::vector<std::string> out;
  for (std::string& line : read_lines(p)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::string joined;
    for (std::size_t i = 0; i + 2 < cells.size(); ++i) {
      if (i) joined += ',';
      joined += cells[i];
    }
    out.push_back(joined);
  }
  return out;
}

void check_determinism() {
  std::string err;
  bool pass = false;
  std::string detail;
  try {
    const fs::path base =
        fs::temp_directory_path() /
        ("prodgraph_acceptance_" +
         std::to_string(
             std::chrono::steady_clock::now().time_since_epoch().count()));
    ExperimentConfig cfg;
    cfg.sizes = {{4, 4}};
    cfg.sample_counts = {200};
    cfg.trials = 3;
    cfg.master_seed = 2026;
    cfg.solver.epsilon = 0.05;
    cfg.solver.epsilon_relative = true;

    cfg.output_dir = (base / "a").string();
    run_experiment(cfg);
    cfg.output_dir = (base / "b").string();
    run_experiment(cfg);
    cfg.output_dir = (base / "c").string();
    ::setenv("PRODGRAPH_WORKERS", "3", 1);
    run_experiment(cfg);
    ::unsetenv("PRODGRAPH_WORKERS");

    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const std::string& what) {
      if (!cond && why.empty()) why = what;
      ok = ok && cond;
    };
    for (const char* other : {"b", "c"}) {
      const fs::path a = base / "a", o = base / other;
      expect(masked_results(a / "results.csv") ==
                 masked_results(o / "results.csv"),
             std::string("results.csv differs between a and ") + other);
      expect(masked_summary(a / "summary.csv") ==
                 masked_summary(o / "summary.csv"),
             std::string("summary.csv differs between a and ") + other);
      // the output directory is echoed into the metadata and differs by
      // construction
      expect(masked_lines(a / "run_meta.json",
                          {"finished_unix_s", "output_dir"}) ==
                 masked_lines(o / "run_meta.json",
                              {"finished_unix_s", "output_dir"}),
             std::string("run_meta.json differs between a and ") + other);
      for (const auto& e : fs::directory_iterator(a / "reports")) {
        const fs::path twin = o / "reports" / e.path().filename();
        expect(fs::exists(twin) &&
                   masked_lines(e.path(), {"wall_time_s"}) ==
                       masked_lines(twin, {"wall_time_s"}),
               "report " + e.path().filename().string() +
                   " differs between a and " + other);
      }
    }

    // byte-level determinism of generated artifacts and repeated solves
    Gso g = erdos_renyi(8, 0.3, 1);
    const std::string f1 = save_gso(g, (base / "g1").string(), "g");
    const std::string f2 = save_gso(g, (base / "g2").string(), "g");
    std::ifstream s1(f1, std::ios::binary), s2(f2, std::ios::binary);
    std::stringstream b1, b2;
    b1 << s1.rdbuf();
    b2 << s2.rdbuf();
    expect(b1.str() == b2.str() && !b1.str().empty(),
           "saved shift files differ");

    PolyFilter h = random_filter(erdos_renyi_connected(5, 0.5, 2), 3, 3);
    Matrix c = h.matrix * h.matrix;
    SolverOptions opts;
    opts.epsilon = 0.05;
    opts.epsilon_relative = true;
    SolveReport r1 = solve_l1_commute(c, opts);
    SolveReport r2 = solve_l1_commute(c, opts);
    expect((r1.s_full->weights - r2.s_full->weights).cwiseAbs().maxCoeff() ==
               0.0 &&
           r1.objective == r2.objective && r1.iterations == r2.iterations,
           "repeated solves differ");

    pass = ok;
    detail = ok ? "three runs (one concurrent) byte-identical with wall-time "
                  "fields masked; saved files and repeated solves identical"
                : why;
  } catch (const std::exception& e) {
    err = e.what();
  }
  if (!err.empty()) {
    record(10, "deterministic outputs", false, "threw: " + err);
    return;
  }
  record(10, "deterministic outputs", pass, detail);
}

}  // namespace

int main() {
  Timer total;
  check_identities();
  check_perfect_recovery();
  check_sample_trends();
  check_runtime_order();
  check_polycov_recovery();
  check_solver_oracle();
  check_determinism();
  std::printf("%s: %d of 10 checks failed, %.1fs total\n",
              g_failures ? "FAIL" : "OK", g_failures, total.s());
  return g_failures ? 1 : 0;
}
