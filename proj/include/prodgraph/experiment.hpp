#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "prodgraph/covariance.hpp"
#include "prodgraph/graph_gen.hpp"
#include "prodgraph/matrix_io.hpp"
#include "prodgraph/metrics.hpp"
#include "prodgraph/reference_solver.hpp"
#include "prodgraph/signal.hpp"
#include "prodgraph/solver.hpp"
#include "prodgraph/version.hpp"

namespace prodgraph {

enum class ExperimentKind { accuracy_vs_size, accuracy_vs_samples, baseline_models };

inline const char* experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::accuracy_vs_size: return "accuracy_vs_size";
    case ExperimentKind::accuracy_vs_samples: return "accuracy_vs_samples";
    case ExperimentKind::baseline_models: return "baseline_models";
  }
  return "?";
}

inline ExperimentKind experiment_from_name(const std::string& s) {
  if (s == "accuracy_vs_size") return ExperimentKind::accuracy_vs_size;
  if (s == "accuracy_vs_samples") return ExperimentKind::accuracy_vs_samples;
  if (s == "baseline_models") return ExperimentKind::baseline_models;
  throw Error(Errc::schema_mismatch, "unknown experiment '" + s + "'");
}

// The analytic sentinel for a sample count is stored as 0.
inline constexpr long kAnalyticSentinel = 0;

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::accuracy_vs_size;
  std::vector<std::pair<long, long>> sizes;
  std::vector<long> sample_counts;
  long trials = 100;
  double er_p = 0.3;
  long filter_L = 3;
  std::vector<std::string> methods = {"st", "kst", "sepkst"};
  GeneratorKind generator = GeneratorKind::two_filter;
  SolverOptions solver;
  double tau = 0.1;
  std::uint64_t master_seed = 0;
  std::string output_dir;
};

namespace detail {

inline void config_defaults(ExperimentConfig& cfg, bool sizes_given,
                            bool counts_given, bool generator_given) {
  switch (cfg.experiment) {
    case ExperimentKind::accuracy_vs_size:
      if (!sizes_given) cfg.sizes = {{4, 4}, {6, 6}, {8, 8}};
      if (!counts_given) cfg.sample_counts = {kAnalyticSentinel};
      break;
    case ExperimentKind::accuracy_vs_samples:
      if (!sizes_given) cfg.sizes = {{4, 4}};
      if (!counts_given) cfg.sample_counts = {200, 1000, 10000};
      break;
    case ExperimentKind::baseline_models:
      if (!sizes_given) cfg.sizes = {{4, 4}, {6, 6}};
      if (!counts_given) cfg.sample_counts = {10000};
      if (!generator_given) cfg.generator = GeneratorKind::mrf;
      break;
  }
}

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.sizes.empty()) throw Error(Errc::schema_mismatch, "sizes is empty");
  for (auto [p, q] : cfg.sizes)
    if (p < 2 || q < 2)
      throw Error(Errc::schema_mismatch, "sizes entries need P, Q >= 2");
  if (cfg.sample_counts.empty())
    throw Error(Errc::schema_mismatch, "sample_counts is empty");
  for (long r : cfg.sample_counts)
    if (r < 0)
      throw Error(Errc::schema_mismatch, "sample counts must be positive");
  if (cfg.trials < 1) throw Error(Errc::schema_mismatch, "trials must be >= 1");
  if (!(cfg.er_p >= 0.0 && cfg.er_p <= 1.0))
    throw Error(Errc::schema_mismatch, "er_p must lie in [0, 1]");
  if (cfg.filter_L < 1)
    throw Error(Errc::schema_mismatch, "filter_L must be >= 1");
  if (cfg.methods.empty())
    throw Error(Errc::schema_mismatch, "methods is empty");
  for (const auto& m : cfg.methods)
    if (m != "st" && m != "kst" && m != "sepkst")
      throw Error(Errc::schema_mismatch, "unknown method '" + m + "'");
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0))
    throw Error(Errc::schema_mismatch, "tau must lie in (0, 1]");
  if (cfg.output_dir.empty())
    throw Error(Errc::schema_mismatch, "output_dir is required");
}

}  // namespace detail

inline nlohmann::json solver_options_to_json(const SolverOptions& o) {
  return nlohmann::json{{"epsilon", o.epsilon},
                        {"epsilon_relative", o.epsilon_relative},
                        {"norm_mode", norm_mode_name(o.norm_mode)},
                        {"beta", o.beta},
                        {"tol", o.tol},
                        {"max_iter", o.max_iter},
                        {"alt_max_rounds", o.alt_max_rounds},
                        {"alt_rel_change", o.alt_rel_change}};
}

inline SolverOptions solver_options_from_json(const nlohmann::json& j) {
  SolverOptions o;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "epsilon") o.epsilon = it->get<double>();
    else if (k == "epsilon_relative") o.epsilon_relative = it->get<bool>();
    else if (k == "norm_mode") o.norm_mode = norm_mode_from_name(it->get<std::string>());
    else if (k == "beta") o.beta = it->get<double>();
    else if (k == "tol") o.tol = it->get<double>();
    else if (k == "max_iter") o.max_iter = it->get<long>();
    else if (k == "alt_max_rounds") o.alt_max_rounds = it->get<long>();
    else if (k == "alt_rel_change") o.alt_rel_change = it->get<double>();
    else throw Error(Errc::schema_mismatch, "unknown solver option '" + k + "'");
  }
  return o;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json sizes = nlohmann::json::array();
  for (auto [p, q] : cfg.sizes) sizes.push_back({p, q});
  nlohmann::json counts = nlohmann::json::array();
  for (long r : cfg.sample_counts) {
    if (r == kAnalyticSentinel) counts.push_back("analytic");
    else counts.push_back(r);
  }
  return nlohmann::json{{"experiment", experiment_name(cfg.experiment)},
                        {"sizes", sizes},
                        {"sample_counts", counts},
                        {"trials", cfg.trials},
                        {"er_p", cfg.er_p},
                        {"filter_L", cfg.filter_L},
                        {"methods", cfg.methods},
                        {"generator", generator_name(cfg.generator)},
                        {"solver", solver_options_to_json(cfg.solver)},
                        {"tau", cfg.tau},
                        {"master_seed", cfg.master_seed},
                        {"output_dir", cfg.output_dir}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  bool sizes_given = false, counts_given = false, generator_given = false;
  if (!j.is_object())
    throw Error(Errc::schema_mismatch, "config root must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "experiment") {
        cfg.experiment = experiment_from_name(it->get<std::string>());
      } else if (k == "sizes") {
        cfg.sizes.clear();
        for (const auto& e : *it) {
          if (!e.is_array() || e.size() != 2)
            throw Error(Errc::schema_mismatch, "sizes entries are [P, Q] pairs");
          cfg.sizes.emplace_back(e[0].get<long>(), e[1].get<long>());
        }
        sizes_given = true;
      } else if (k == "sample_counts") {
        cfg.sample_counts.clear();
        for (const auto& e : *it) {
          if (e.is_string()) {
            if (e.get<std::string>() != "analytic")
              throw Error(Errc::schema_mismatch,
                          "sample_counts strings must be \"analytic\"");
            cfg.sample_counts.push_back(kAnalyticSentinel);
          } else {
            const long r = e.get<long>();
            if (r < 1)
              throw Error(Errc::schema_mismatch,
                          "sample counts must be >= 1");
            cfg.sample_counts.push_back(r);
          }
        }
        counts_given = true;
      } else if (k == "trials") {
        cfg.trials = it->get<long>();
      } else if (k == "er_p") {
        cfg.er_p = it->get<double>();
      } else if (k == "filter_L") {
        cfg.filter_L = it->get<long>();
      } else if (k == "methods") {
        cfg.methods = it->get<std::vector<std::string>>();
      } else if (k == "generator") {
        cfg.generator = generator_from_name(it->get<std::string>());
        generator_given = true;
      } else if (k == "solver") {
        cfg.solver = solver_options_from_json(*it);
      } else if (k == "tau") {
        cfg.tau = it->get<double>();
      } else if (k == "master_seed") {
        cfg.master_seed = it->get<std::uint64_t>();
      } else if (k == "output_dir") {
        cfg.output_dir = it->get<std::string>();
      } else {
        throw Error(Errc::schema_mismatch, "unknown config key '" + k + "'");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(Errc::schema_mismatch,
                  "bad value for config key '" + k + "': " + e.what());
    }
  }
  detail::config_defaults(cfg, sizes_given, counts_given, generator_given);
  detail::validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_format, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(Errc::io_format, "config parse failure: " + std::string(e.what()));
  }
  return config_from_json(j);
}

inline nlohmann::json report_to_json(const SolveReport& r) {
  nlohmann::json j{{"status", status_name(r.status)},
                   {"objective", r.objective},
                   {"commut_residual", r.commut_residual},
                   {"iterations", r.iterations},
                   {"wall_time_s", r.wall_time_s},
                   {"options", solver_options_to_json(r.options)}};
  j["alt_rounds"] = r.alt_rounds ? nlohmann::json(*r.alt_rounds) : nlohmann::json();
  j["status_p"] = r.status_p ? nlohmann::json(status_name(*r.status_p)) : nlohmann::json();
  j["status_q"] = r.status_q ? nlohmann::json(status_name(*r.status_q)) : nlohmann::json();
  return j;
}

namespace detail {

// Stable method ids for seed derivation; id 0 is the shared ground truth.
inline long method_id(const std::string& m) {
  if (m == "st") return 1;
  if (m == "kst") return 2;
  if (m == "sepkst") return 3;
  throw Error(Errc::invalid_argument, "unknown method '" + m + "'");
}

inline std::uint64_t derive_seed(std::uint64_t master, long size_idx,
                                 long r_idx, long method, long trial) {
  const std::uint64_t counter =
      (static_cast<std::uint64_t>(size_idx) << 44) |
      (static_cast<std::uint64_t>(r_idx) << 36) |
      (static_cast<std::uint64_t>(method) << 32) |
      static_cast<std::uint64_t>(trial);
  return CounterRng(master, /*stream=*/0x45585053ULL).raw(counter);
}

struct TrialData {
  Gso sp, sq;
  CovarianceSet cov;
};

// Ground truth and covariances for one (size, sample-count, trial) cell.
// Factor graphs are redrawn until connected; the polynomial-covariance
// generator also redraws the whole instance while the polynomial is
// singular on the drawn product shift.
inline TrialData make_trial_data(const ExperimentConfig& cfg, long P, long Q,
                                 long R, std::uint64_t data_seed) {
  CounterRng d(data_seed, /*stream=*/0x5452494cULL);
  TrialData td;
  const bool analytic = (R == kAnalyticSentinel);
  if (cfg.generator == GeneratorKind::two_filter) {
    td.sp = erdos_renyi_connected(P, cfg.er_p, d.raw(1));
    td.sq = erdos_renyi_connected(Q, cfg.er_p, d.raw(2));
    PolyFilter hp = random_filter(td.sp, cfg.filter_L, d.raw(3));
    PolyFilter hq = random_filter(td.sq, cfg.filter_L, d.raw(4));
    if (analytic) {
      td.cov = analytic_cov(hp, hq, /*include_full=*/true);
    } else {
      td.cov = sample_cov(generate_2d(hp, hq, R, d.raw(5)), true);
    }
    return td;
  }
  if (cfg.generator == GeneratorKind::mrf) {
    td.sp = erdos_renyi_connected(P, cfg.er_p, d.raw(1));
    td.sq = erdos_renyi_connected(Q, cfg.er_p, d.raw(2));
    Gso sprod = product(td.sp, td.sq, ProductKind::kronecker);
    if (analytic) {
      Matrix cy = mrf_cov(sprod);
      td.cov.c_p = partial_trace_q(cy, P, Q);
      td.cov.c_q = partial_trace_p(cy, P, Q);
      td.cov.c_y = std::move(cy);
      td.cov.provenance = CovProvenance::analytic;
    } else {
      td.cov = sample_cov(generate_mrf(sprod, P, Q, R, d.raw(5)), true);
    }
    return td;
  }
  // polynomial covariance: the polynomial has no constant term, so any zero
  // eigenvalue of the product shift makes it singular; redraw the instance
  for (int attempt = 0; attempt < 100; ++attempt) {
    CounterRng da = d.split(static_cast<std::uint64_t>(attempt));
    Gso sp = erdos_renyi_connected(P, cfg.er_p, da.raw(1));
    Gso sq = erdos_renyi_connected(Q, cfg.er_p, da.raw(2));
    Gso sprod = product(sp, sq, ProductKind::kronecker);
    Vector coeffs(cfg.filter_L);
    CounterRng dc = da.split(0x434f4546ULL);
    for (long l = 0; l < cfg.filter_L; ++l)
      coeffs(l) = 2.0 * dc.uniform(static_cast<std::uint64_t>(l)) - 1.0;
    try {
      Matrix g = poly_cov_root(sprod, coeffs);
      td.sp = std::move(sp);
      td.sq = std::move(sq);
      if (analytic) {
        Matrix cy = g * g;
        td.cov.c_p = partial_trace_q(cy, P, Q);
        td.cov.c_q = partial_trace_p(cy, P, Q);
        td.cov.c_y = std::move(cy);
        td.cov.provenance = CovProvenance::analytic;
      } else {
        td.cov = sample_cov(
            generate_polycov(sprod, P, Q, coeffs, R, da.raw(5)), true);
      }
      return td;
    } catch (const Error& e) {
      if (e.code() != Errc::singular_filter) throw;
    }
  }
  throw Error(Errc::exhausted_retries,
              "no nonsingular polynomial covariance instance in 100 attempts");
}

struct ResultRow {
  std::string method;
  long P = 0, Q = 0, R = 0;
  std::uint64_t seed = 0;
  double tau = 0;
  double precision = 0, recall = 0;
  double fscore_p = std::numeric_limits<double>::quiet_NaN();
  double fscore_q = std::numeric_limits<double>::quiet_NaN();
  double fscore_prod = 0;
  double commut = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0;
};

inline const char* results_header() {
  return "method,P,Q,R,seed,tau,precision,recall,fscore_p,fscore_q,"
         "fscore_prod,commutativity,wall_time_s";
}

inline std::string format_row(const ResultRow& r) {
  std::ostringstream os;
  os << r.method << ',' << r.P << ',' << r.Q << ',';
  if (r.R == kAnalyticSentinel) os << "analytic";
  else os << r.R;
  os << ',' << r.seed << ',' << format_double(r.tau) << ','
     << format_double(r.precision) << ',' << format_double(r.recall) << ','
     << format_double(r.fscore_p) << ',' << format_double(r.fscore_q) << ','
     << format_double(r.fscore_prod) << ',' << format_double(r.commut) << ','
     << format_double(r.wall_time_s);
  return os.str();
}

}  // namespace detail

struct ExperimentOutcome {
  std::string results_path;
  std::string summary_path;
  long failed_trials = 0;
};

// Population statistics over the non-NaN entries of each column.
inline void summarize(const std::string& results_path,
                      const std::string& summary_path) {
  std::ifstream in(results_path);
  if (!in) throw Error(Errc::io_format, "cannot open '" + results_path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw Error(Errc::schema_mismatch, "results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != detail::results_header())
    throw Error(Errc::schema_mismatch,
                "results header mismatch: got '" + line + "'");
  struct Key {
    std::string method;
    long P, Q, R;
    bool operator<(const Key& o) const {
      if (method != o.method) return method < o.method;
      if (P != o.P) return P < o.P;
      if (Q != o.Q) return Q < o.Q;
      return R < o.R;
    }
  };
  struct Acc {
    long count = 0;
    std::vector<std::vector<double>> cols;
    Acc() : cols(7) {}
  };
  std::map<Key, Acc> groups;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 13)
      throw Error(Errc::schema_mismatch,
                  "row " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, expected 13");
    Key key;
    key.method = cells[0];
    try {
      key.P = std::stol(cells[1]);
      key.Q = std::stol(cells[2]);
      key.R = (cells[3] == "analytic") ? kAnalyticSentinel : std::stol(cells[3]);
      Acc& acc = groups[key];
      ++acc.count;
      for (int c = 0; c < 7; ++c) {
        const double v = std::stod(cells[static_cast<std::size_t>(6 + c)]);
        if (!std::isnan(v)) acc.cols[static_cast<std::size_t>(c)].push_back(v);
      }
    } catch (const Error&) {
      throw;
    } catch (...) {
      throw Error(Errc::schema_mismatch,
                  "unparseable row " + std::to_string(lineno));
    }
  }
  std::ofstream out(summary_path, std::ios::binary);
  if (!out) throw Error(Errc::io_format, "cannot open '" + summary_path + "'");
  out << "method,P,Q,R,count";
  for (const char* name :
       {"precision", "recall", "fscore_p", "fscore_q", "fscore_prod",
        "commutativity", "wall_time_s"})
    out << ",mean_" << name << ",std_" << name;
  out << '\n';
  for (const auto& [key, acc] : groups) {
    out << key.method << ',' << key.P << ',' << key.Q << ',';
    if (key.R == kAnalyticSentinel) out << "analytic";
    else out << key.R;
    out << ',' << acc.count;
    for (const auto& col : acc.cols) {
      if (col.empty()) {
        out << ",nan,nan";
        continue;
      }
      double mean = 0;
      for (double v : col) mean += v;
      mean /= static_cast<double>(col.size());
      double var = 0;
      for (double v : col) var += (v - mean) * (v - mean);
      var /= static_cast<double>(col.size());
      out << ',' << format_double(mean) << ',' << format_double(std::sqrt(var));
    }
    out << '\n';
  }
}

// Runs the configured grid. Trials are independent; worker count comes from
// PRODGRAPH_WORKERS (default 1). Row order and report contents do not depend
// on scheduling: every cell writes into its own preallocated slot.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  detail::validate_config(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  fs::create_directories(fs::path(cfg.output_dir) / "reports");

  struct Cell {
    long size_idx, r_idx, trial;
    std::vector<detail::ResultRow> rows;
    std::vector<std::pair<std::string, nlohmann::json>> reports;
    std::vector<std::string> failures;
  };
  std::vector<Cell> cells;
  for (long si = 0; si < static_cast<long>(cfg.sizes.size()); ++si)
    for (long ri = 0; ri < static_cast<long>(cfg.sample_counts.size()); ++ri)
      for (long t = 0; t < cfg.trials; ++t)
        cells.push_back(Cell{si, ri, t, {}, {}, {}});

  long workers = 1;
  if (const char* env = std::getenv("PRODGRAPH_WORKERS")) {
    try {
      workers = std::max(1L, std::min(64L, std::stol(env)));
    } catch (...) {
      throw Error(Errc::invalid_argument,
                  "PRODGRAPH_WORKERS must be an integer");
    }
  }

  auto run_cell = [&cfg](Cell& cell) {
    const long P = cfg.sizes[static_cast<std::size_t>(cell.size_idx)].first;
    const long Q = cfg.sizes[static_cast<std::size_t>(cell.size_idx)].second;
    const long R = cfg.sample_counts[static_cast<std::size_t>(cell.r_idx)];
    const std::uint64_t data_seed = detail::derive_seed(
        cfg.master_seed, cell.size_idx, cell.r_idx, 0, cell.trial);
    std::optional<detail::TrialData> td;
    std::string data_error;
    try {
      td = detail::make_trial_data(cfg, P, Q, R, data_seed);
    } catch (const Error& e) {
      data_error = e.what();
    }
    for (const std::string& method : cfg.methods) {
      detail::ResultRow row;
      row.method = method;
      row.P = P;
      row.Q = Q;
      row.R = R;
      row.seed = data_seed;
      row.tau = cfg.tau;
      std::ostringstream rname;
      rname << method << "_P" << P << "_Q" << Q << "_R";
      if (R == kAnalyticSentinel) rname << "analytic";
      else rname << R;
      rname << "_t";
      rname.fill('0');
      rname.width(3);
      rname << cell.trial;
      if (!td) {
        cell.failures.push_back("cell P=" + std::to_string(P) +
                                " Q=" + std::to_string(Q) + " trial=" +
                                std::to_string(cell.trial) + " method=" + method +
                                ": " + data_error);
        cell.rows.push_back(row);
        continue;
      }
      try {
        SolveReport rep;
        ProductEval ev;
        const Matrix& cy = *td->cov.c_y;
        if (method == "st") {
          rep = solve_st(cy, cfg.solver);
          const Matrix& est = rep.s_full->weights;
          Matrix truth = product_weights(td->sp.weights, td->sq.weights,
                                         ProductKind::kronecker);
          EvalResult er = fscore(binarize(est, cfg.tau), binarize(truth, cfg.tau));
          row.precision = er.precision;
          row.recall = er.recall;
          row.fscore_prod = er.fscore;
          row.commut = commutativity(cy, est);
        } else {
          if (method == "kst") rep = solve_kst(cy, P, Q, cfg.solver);
          else rep = solve_sepkst(td->cov.c_p, td->cov.c_q, cfg.solver);
          ev = eval_product(rep.s_p->weights, rep.s_q->weights, td->sp.weights,
                            td->sq.weights, ProductKind::kronecker, &cy,
                            cfg.tau);
          row.precision = ev.prod.precision;
          row.recall = ev.prod.recall;
          row.fscore_p = ev.factor_p.fscore;
          row.fscore_q = ev.factor_q.fscore;
          row.fscore_prod = ev.prod.fscore;
          row.commut = ev.commut;
        }
        row.wall_time_s = rep.wall_time_s;
        if (rep.status == SolveStatus::infeasible) {
          row.precision = row.recall = row.fscore_prod = 0.0;
          if (method != "st") row.fscore_p = row.fscore_q = 0.0;
          row.commut = std::numeric_limits<double>::quiet_NaN();
          cell.failures.push_back("cell P=" + std::to_string(P) + " Q=" +
                                  std::to_string(Q) + " trial=" +
                                  std::to_string(cell.trial) + " method=" +
                                  method + ": solver reported infeasible");
        }
        nlohmann::json rj = report_to_json(rep);
        rj["method"] = method;
        rj["P"] = P;
        rj["Q"] = Q;
        rj["R"] = (R == kAnalyticSentinel) ? nlohmann::json("analytic")
                                           : nlohmann::json(R);
        rj["trial"] = cell.trial;
        rj["data_seed"] = data_seed;
        cell.reports.emplace_back(rname.str() + ".report.json", std::move(rj));
      } catch (const Error& e) {
        cell.failures.push_back("cell P=" + std::to_string(P) + " Q=" +
                                std::to_string(Q) + " trial=" +
                                std::to_string(cell.trial) + " method=" +
                                method + ": " + e.what());
      }
      cell.rows.push_back(row);
    }
  };

  if (workers == 1) {
    for (Cell& c : cells) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (long w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(cells[i]);
        }
      });
    for (auto& th : pool) th.join();
  }

  ExperimentOutcome outcome;
  const fs::path results_path = fs::path(cfg.output_dir) / "results.csv";
  {
    std::ofstream out(results_path, std::ios::binary);
    if (!out)
      throw Error(Errc::io_format,
                  "cannot open '" + results_path.string() + "'");
    out << detail::results_header() << '\n';
    for (const Cell& c : cells)
      for (const auto& row : c.rows) out << detail::format_row(row) << '\n';
  }
  std::vector<std::string> failures;
  for (const Cell& c : cells) {
    for (const auto& [name, body] : c.reports) {
      std::ofstream out(fs::path(cfg.output_dir) / "reports" / name,
                        std::ios::binary);
      out << body.dump(2) << '\n';
    }
    failures.insert(failures.end(), c.failures.begin(), c.failures.end());
  }
  {
    nlohmann::json meta{{"tool_version", kVersion},
                        {"config", config_to_json(cfg)},
                        {"failures", failures},
                        {"finished_unix_s",
                         static_cast<long>(std::time(nullptr))}};
    std::ofstream out(fs::path(cfg.output_dir) / "run_meta.json",
                      std::ios::binary);
    out << meta.dump(2) << '\n';
  }
  const fs::path summary_path = fs::path(cfg.output_dir) / "summary.csv";
  summarize(results_path.string(), summary_path.string());
  outcome.results_path = results_path.string();
  outcome.summary_path = summary_path.string();
  outcome.failed_trials = static_cast<long>(failures.size());
  return outcome;
}

}  // namespace prodgraph
