#pragma once

#include <stdexcept>
#include <string>

namespace prodgraph {

enum class Errc {
  asymmetric_matrix,
  negative_entry,
  nonzero_diagonal,
  normalization_violated,
  convergence_failure,
  ill_conditioned,
  exhausted_retries,
  singular_filter,
  dimension_mismatch,
  schema_mismatch,
  io_format,
  invalid_argument,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::asymmetric_matrix: return "AsymmetricMatrix";
    case Errc::negative_entry: return "NegativeEntry";
    case Errc::nonzero_diagonal: return "NonzeroDiagonal";
    case Errc::normalization_violated: return "NormalizationViolated";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::ill_conditioned: return "IllConditioned";
    case Errc::exhausted_retries: return "ExhaustedRetries";
    case Errc::singular_filter: return "SingularFilter";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::io_format: return "IoFormat";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

// Error carries a machine-checkable code plus, where it makes sense,
// the first offending matrix index.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg, long row = -1, long col = -1)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code), row_(row), col_(col) {}

  Errc code() const noexcept { return code_; }
  long row() const noexcept { return row_; }
  long col() const noexcept { return col_; }

 private:
  Errc code_;
  long row_, col_;
};

}  // namespace prodgraph
