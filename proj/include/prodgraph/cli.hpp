#pragma once

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prodgraph/experiment.hpp"
#include "prodgraph/tensor_io.hpp"
#include "prodgraph/version.hpp"

namespace prodgraph {
namespace cli_detail {

inline std::string prob_token(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return buf;
}

inline Vector parse_coeff_list(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      vals.push_back(std::stod(cell));
    } catch (...) {
      throw Error(Errc::invalid_argument, "bad coefficient '" + cell + "'");
    }
  }
  if (vals.empty()) throw Error(Errc::invalid_argument, "empty coefficient list");
  Vector v(static_cast<long>(vals.size()));
  for (long i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
  return v;
}

struct SolverCliOpts {
  SolverOptions opts;
  std::string norm = "first-row-unit";
  void attach(CLI::App* app) {
    app->add_option("--eps", opts.epsilon, "commutator ball radius");
    app->add_flag("--eps-rel", opts.epsilon_relative,
                  "radius is relative to ||C||_F of each solve");
    app->add_option("--norm", norm,
                    "normalization: first-row-unit or row-stochastic");
    app->add_option("--beta", opts.beta, "weight of the second factor term");
    app->add_option("--tol", opts.tol, "convergence tolerance");
    app->add_option("--max-iter", opts.max_iter, "iteration cap per solve");
    app->add_option("--alt-max-rounds", opts.alt_max_rounds,
                    "alternation round cap");
    app->add_option("--alt-rel-change", opts.alt_rel_change,
                    "alternation stopping threshold");
  }
  SolverOptions resolve() {
    opts.norm_mode = norm_mode_from_name(norm);
    return opts;
  }
};

inline void write_solve_outputs(const SolveReport& rep,
                                const std::string& out_dir,
                                const std::string& method) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  nlohmann::json rj = report_to_json(rep);
  rj["method"] = method;
  std::ofstream out(fs::path(out_dir) / (method + ".report.json"),
                    std::ios::binary);
  out << rj.dump(2) << '\n';
  if (rep.s_full) save_gso(*rep.s_full, out_dir, method + "_full");
  if (rep.s_p) save_gso(*rep.s_p, out_dir, method + "_p");
  if (rep.s_q) save_gso(*rep.s_q, out_dir, method + "_q");
  std::cout << method << ": status=" << status_name(rep.status)
            << " objective=" << format_double(rep.objective)
            << " commut_residual=" << format_double(rep.commut_residual)
            << " iterations=" << rep.iterations << "\n";
}

}  // namespace cli_detail

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 2 usage, 3 bad input or config, 4 solver did not reach optimal.
inline int run_cli(int argc, const char* const* argv) {
  using cli_detail::SolverCliOpts;
  CLI::App app{"prodgraph: product-graph topology from two-dimensional "
               "stationary signals"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  int exit_code = 0;

  // generate
  auto* gen = app.add_subcommand("generate", "draw graphs, signals, covariances");
  std::vector<std::string> er_args, product_args, coeffs_opt;
  std::string gen_out = ".";
  std::string gen_norm = "binary";
  std::uint64_t gen_seed = 0;
  bool gen_connected = false, gen_full = false;
  std::string product_kind = "kronecker";
  std::string shift_p_path, shift_q_path, shift_path, tensor_dir;
  long gen_L = 3, gen_R = 0, gen_P = 0, gen_Q = 0;
  std::string gen_coeffs;
  gen->add_option("--er", er_args, "draw an Erdos-Renyi shift: N P")
      ->expected(2);
  gen->add_flag("--connected", gen_connected,
                "redraw until the graph is connected");
  gen->add_option("--product", product_args,
                  "combine two shift files: A.gso.csv B.gso.csv")
      ->expected(2);
  gen->add_option("--kind", product_kind, "kronecker, cartesian, or strong");
  gen->add_option("--signals", tensor_dir,
                  "write a signal tensor to this directory");
  gen->add_option("--shift-p", shift_p_path, "first factor shift file");
  gen->add_option("--shift-q", shift_q_path, "second factor shift file");
  gen->add_option("--shift", shift_path, "product shift file");
  gen->add_option("--L", gen_L, "filter length");
  gen->add_option("--R", gen_R, "realization count");
  gen->add_option("--P", gen_P, "first factor size");
  gen->add_option("--Q", gen_Q, "second factor size");
  gen->add_option("--coeffs", gen_coeffs,
                  "comma-separated taps (poly covariance: from degree 1)");
  auto* gen_mrf =
      gen->add_flag("--mrf", "Gauss-Markov tensor on a product shift");
  auto* gen_poly =
      gen->add_flag("--poly", "polynomial-covariance tensor on a product shift");
  auto* gen_acov = gen->add_flag("--analytic-cov",
                                 "closed-form covariances from factor shifts");
  auto* gen_scov =
      gen->add_flag("--sample-cov", "empirical covariances from a tensor");
  gen->add_option("--tensor", tensor_dir, "tensor directory (for --sample-cov)");
  gen->add_flag("--full", gen_full, "also write the joint covariance");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--norm", gen_norm,
                  "shift normalization for --er output");
  gen->add_option("-o,--out", gen_out, "output directory");

  gen->callback([&]() {
    namespace fs = std::filesystem;
    const bool did_er = !er_args.empty();
    const bool did_product = !product_args.empty();
    if (did_er) {
      long n = 0;
      double p = 0;
      try {
        n = std::stol(er_args[0]);
        p = std::stod(er_args[1]);
      } catch (...) {
        throw Error(Errc::invalid_argument, "--er expects N P");
      }
      Gso g = gen_connected ? erdos_renyi_connected(n, p, gen_seed)
                            : erdos_renyi(n, p, gen_seed);
      const NormMode mode = norm_mode_from_name(gen_norm);
      if (mode != NormMode::binary_unnormalized) g = renormalize(g, mode);
      std::ostringstream stem;
      stem << "er_n" << n << "_p" << cli_detail::prob_token(p) << "_s"
           << gen_seed;
      std::cout << save_gso(g, gen_out, stem.str()) << "\n";
      return;
    }
    if (did_product) {
      Gso a = load_gso(product_args[0]);
      Gso b = load_gso(product_args[1]);
      ProductKind kind = product_kind_from_name(product_kind);
      Gso prod = product(a, b, kind);
      std::cout << save_gso(prod, gen_out,
                            std::string("prod_") + product_kind_name(kind))
                << "\n";
      return;
    }
    if (!tensor_dir.empty() && !*gen_scov && !*gen_mrf && !*gen_poly) {
      // two-filter signals
      if (shift_p_path.empty() || shift_q_path.empty() || gen_R < 1)
        throw Error(Errc::invalid_argument,
                    "--signals needs --shift-p, --shift-q, and --R");
      Gso sp = load_gso(shift_p_path), sq = load_gso(shift_q_path);
      CounterRng d(gen_seed, 0x434c4947ULL);
      PolyFilter hp = random_filter(sp, gen_L, d.raw(1));
      PolyFilter hq = random_filter(sq, gen_L, d.raw(2));
      SignalTensor t = generate_2d(hp, hq, gen_R, d.raw(3));
      save_tensor(t, tensor_dir);
      std::cout << tensor_dir << "\n";
      return;
    }
    if (*gen_mrf || *gen_poly) {
      if (shift_path.empty() || gen_P < 2 || gen_Q < 2 || gen_R < 1 ||
          tensor_dir.empty())
        throw Error(Errc::invalid_argument,
                    "--mrf/--poly need --shift, --P, --Q, --R, --signals DIR");
      Gso s = load_gso(shift_path);
      SignalTensor t =
          *gen_mrf
              ? generate_mrf(s, gen_P, gen_Q, gen_R, gen_seed)
              : generate_polycov(s, gen_P, gen_Q,
                                 cli_detail::parse_coeff_list(gen_coeffs),
                                 gen_R, gen_seed);
      save_tensor(t, tensor_dir);
      std::cout << tensor_dir << "\n";
      return;
    }
    if (*gen_acov) {
      if (shift_p_path.empty() || shift_q_path.empty())
        throw Error(Errc::invalid_argument,
                    "--analytic-cov needs --shift-p and --shift-q");
      Gso sp = load_gso(shift_p_path), sq = load_gso(shift_q_path);
      CounterRng d(gen_seed, 0x434c4947ULL);
      PolyFilter hp = random_filter(sp, gen_L, d.raw(1));
      PolyFilter hq = random_filter(sq, gen_L, d.raw(2));
      CovarianceSet cov = analytic_cov(hp, hq, gen_full);
      fs::create_directories(gen_out);
      write_matrix_csv((fs::path(gen_out) / "cov_p.csv").string(), cov.c_p);
      write_matrix_csv((fs::path(gen_out) / "cov_q.csv").string(), cov.c_q);
      if (cov.c_y)
        write_matrix_csv((fs::path(gen_out) / "cov_y.csv").string(), *cov.c_y);
      std::cout << gen_out << "\n";
      return;
    }
    if (*gen_scov) {
      if (tensor_dir.empty())
        throw Error(Errc::invalid_argument, "--sample-cov needs --tensor DIR");
      SignalTensor t = load_tensor(tensor_dir);
      CovarianceSet cov = sample_cov(t, gen_full);
      fs::create_directories(gen_out);
      write_matrix_csv((fs::path(gen_out) / "cov_p.csv").string(), cov.c_p);
      write_matrix_csv((fs::path(gen_out) / "cov_q.csv").string(), cov.c_q);
      if (cov.c_y)
        write_matrix_csv((fs::path(gen_out) / "cov_y.csv").string(), *cov.c_y);
      std::cout << gen_out << "\n";
      return;
    }
    throw CLI::CallForHelp();
  });

  // solve
  auto* solve = app.add_subcommand("solve", "estimate shift operators");
  solve->require_subcommand(1);
  std::string cy_path, cp_path, cq_path, solve_out = ".";
  long solve_P = 0, solve_Q = 0;

  auto* solve_st_cmd = solve->add_subcommand("st", "full-size estimate");
  SolverCliOpts st_opts;
  solve_st_cmd->add_option("--cy", cy_path, "joint covariance CSV")->required();
  solve_st_cmd->add_option("-o,--out", solve_out, "output directory");
  st_opts.attach(solve_st_cmd);
  solve_st_cmd->callback([&]() {
    SolveReport rep = solve_st(read_matrix_csv(cy_path), st_opts.resolve());
    cli_detail::write_solve_outputs(rep, solve_out, "st");
    if (rep.status != SolveStatus::optimal) exit_code = 4;
  });

  auto* solve_kst_cmd =
      solve->add_subcommand("kst", "factor estimates, joint constraint");
  SolverCliOpts kst_opts;
  solve_kst_cmd->add_option("--cy", cy_path, "joint covariance CSV")->required();
  solve_kst_cmd->add_option("--P", solve_P, "first factor size")->required();
  solve_kst_cmd->add_option("--Q", solve_Q, "second factor size")->required();
  solve_kst_cmd->add_option("-o,--out", solve_out, "output directory");
  kst_opts.attach(solve_kst_cmd);
  solve_kst_cmd->callback([&]() {
    SolveReport rep = solve_kst(read_matrix_csv(cy_path), solve_P, solve_Q,
                                kst_opts.resolve());
    cli_detail::write_solve_outputs(rep, solve_out, "kst");
    if (rep.status != SolveStatus::optimal) exit_code = 4;
  });

  auto* solve_sep_cmd =
      solve->add_subcommand("sepkst", "independent dimension-wise estimates");
  SolverCliOpts sep_opts;
  solve_sep_cmd->add_option("--cp", cp_path, "first factor covariance CSV")
      ->required();
  solve_sep_cmd->add_option("--cq", cq_path, "second factor covariance CSV")
      ->required();
  solve_sep_cmd->add_option("-o,--out", solve_out, "output directory");
  sep_opts.attach(solve_sep_cmd);
  solve_sep_cmd->callback([&]() {
    SolveReport rep = solve_sepkst(read_matrix_csv(cp_path),
                                   read_matrix_csv(cq_path), sep_opts.resolve());
    cli_detail::write_solve_outputs(rep, solve_out, "sepkst");
    if (rep.status != SolveStatus::optimal) exit_code = 4;
  });

  // eval
  auto* eval = app.add_subcommand("eval", "score an estimate against truth");
  std::string pred_path, truth_path, cov_path, eval_out;
  double eval_tau = 0.1;
  eval->add_option("--pred", pred_path, "estimated shift CSV")->required();
  eval->add_option("--truth", truth_path, "true shift CSV")->required();
  eval->add_option("--tau", eval_tau, "binarization threshold");
  eval->add_option("--cov", cov_path,
                   "covariance CSV for the commutativity column");
  eval->add_option("-o,--out", eval_out, "also write the row to this CSV");
  eval->callback([&]() {
    Matrix pred = read_matrix_csv(pred_path);
    Matrix truth = read_matrix_csv(truth_path);
    EvalResult er = fscore(binarize(pred, eval_tau), binarize(truth, eval_tau));
    double commut = std::numeric_limits<double>::quiet_NaN();
    if (!cov_path.empty())
      commut = commutativity(read_matrix_csv(cov_path), pred);
    std::ostringstream row;
    row << format_double(er.precision) << ',' << format_double(er.recall)
        << ',' << format_double(er.fscore) << ',' << format_double(commut);
    std::cout << "precision,recall,fscore,commutativity\n" << row.str() << "\n";
    if (!eval_out.empty()) {
      std::ofstream out(eval_out, std::ios::binary);
      if (!out) throw Error(Errc::io_format, "cannot open '" + eval_out + "'");
      out << "precision,recall,fscore,commutativity\n" << row.str() << '\n';
    }
  });

  // bench
  auto* bench = app.add_subcommand("bench", "run a configured experiment grid");
  std::string config_path;
  bench->add_option("--config", config_path, "experiment config JSON")
      ->required();
  bench->callback([&]() {
    ExperimentConfig cfg = load_config(config_path);
    ExperimentOutcome out = run_experiment(cfg);
    std::cout << "results: " << out.results_path << "\n"
              << "summary: " << out.summary_path << "\n"
              << "failed trials: " << out.failed_trials << "\n";
  });

  // summarize
  auto* summ = app.add_subcommand("summarize", "aggregate a results CSV");
  std::string summ_in, summ_out;
  summ->add_option("--input", summ_in, "results.csv path")->required();
  summ->add_option("-o,--out", summ_out, "summary output path");
  summ->callback([&]() {
    if (summ_out.empty())
      summ_out =
          (std::filesystem::path(summ_in).parent_path() / "summary.csv")
              .string();
    summarize(summ_in, summ_out);
    std::cout << summ_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return exit_code;
}

}  // namespace prodgraph
