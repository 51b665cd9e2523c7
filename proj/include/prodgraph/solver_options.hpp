#pragma once

#include <limits>
#include <optional>
#include <string>

#include "prodgraph/gso.hpp"

namespace prodgraph {

enum class SolveStatus { optimal, max_iter, infeasible };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "?";
}

inline SolveStatus status_from_name(const std::string& s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "max_iter") return SolveStatus::max_iter;
  if (s == "infeasible") return SolveStatus::infeasible;
  throw Error(Errc::invalid_argument, "unknown status '" + s + "'");
}

struct SolverOptions {
  double epsilon = 0.0;       // commutator ball radius
  bool epsilon_relative = false;  // radius scales with ||C||_F of each solve
  NormMode norm_mode = NormMode::first_row_unit;
  double beta = 1.0;          // weight on the second factor's l1 term
  double tol = 1e-6;
  long max_iter = 5000;
  long alt_max_rounds = 20;
  double alt_rel_change = 1e-4;
};

struct SolveReport {
  std::optional<Gso> s_p, s_q, s_full;
  double objective = std::numeric_limits<double>::quiet_NaN();
  // Frobenius norm (not squared) of the relevant commutator at the solution.
  double commut_residual = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  std::optional<long> alt_rounds;
  double wall_time_s = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::optional<SolveStatus> status_p, status_q;  // per-factor detail
  SolverOptions options;
};

}  // namespace prodgraph
