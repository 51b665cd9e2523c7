#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "prodgraph/errors.hpp"
#include "prodgraph/gso.hpp"

namespace prodgraph {

// Shortest decimal form that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char probe[40];
      std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
      std::sscanf(probe, "%lf", &back);
      if (back == v) return probe;
    }
  }
  return buf;
}

// Plain numeric CSV, no header, one row per line; dimensions are inferred.
inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_format, "cannot open '" + path + "' for writing");
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(Errc::io_format, "write failed for '" + path + "'");
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_format, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#')
      throw Error(Errc::io_format,
                  "comment line " + std::to_string(lineno) + " in '" + path +
                      "': matrix CSV carries no comments or headers");
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size())
          throw Error(Errc::io_format, "bad cell '" + cell + "' at line " +
                                           std::to_string(lineno) + " in '" +
                                           path + "'");
        row.push_back(v);
      } catch (const Error&) {
        throw;
      } catch (...) {
        throw Error(Errc::io_format, "bad cell '" + cell + "' at line " +
                                         std::to_string(lineno) + " in '" +
                                         path + "'");
      }
    }
    if (row.empty())
      throw Error(Errc::io_format,
                  "empty row at line " + std::to_string(lineno) + " in '" + path + "'");
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Errc::io_format,
                  "ragged row at line " + std::to_string(lineno) + " in '" + path +
                      "': expected " + std::to_string(rows.front().size()) +
                      " cells, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::io_format, "no data in '" + path + "'");
  Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

// Shift operators live in "<stem>.<mode>.gso.csv" so the normalization mode
// travels with the file.
inline std::string gso_filename(const std::string& stem, NormMode mode) {
  return stem + "." + norm_mode_token(mode) + ".gso.csv";
}

inline std::string save_gso(const Gso& g, const std::string& dir,
                            const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::string path =
      (std::filesystem::path(dir) / gso_filename(stem, g.norm_mode)).string();
  write_matrix_csv(path, g.weights);
  return path;
}

inline NormMode norm_mode_from_path(const std::string& path) {
  const std::string name = std::filesystem::path(path).filename().string();
  const std::string suffix = ".gso.csv";
  if (name.size() <= suffix.size() ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw Error(Errc::io_format,
                "'" + name + "' does not end in " + suffix);
  const std::string head = name.substr(0, name.size() - suffix.size());
  const auto dot = head.rfind('.');
  if (dot == std::string::npos)
    throw Error(Errc::io_format,
                "'" + name + "' carries no normalization mode token");
  return norm_mode_from_name(head.substr(dot + 1));
}

inline Gso load_gso(const std::string& path) {
  const NormMode mode = norm_mode_from_path(path);
  return validate_gso(read_matrix_csv(path), mode);
}

}  // namespace prodgraph
