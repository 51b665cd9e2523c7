#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "prodgraph/matrix_io.hpp"
#include "prodgraph/signal.hpp"

namespace prodgraph {

// A tensor directory holds tensor_meta.json plus slabs.csv with the R slabs
// stacked vertically ((R*P) x Q, slab r in rows [r*P, (r+1)*P)).
inline void save_tensor(const SignalTensor& t, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json meta{{"P", t.P},
                      {"Q", t.Q},
                      {"R", t.R},
                      {"generator", generator_name(t.generator)},
                      {"seed", t.seed}};
  std::ofstream mo(fs::path(dir) / "tensor_meta.json", std::ios::binary);
  if (!mo) throw Error(Errc::io_format, "cannot write tensor meta in '" + dir + "'");
  mo << meta.dump(2) << '\n';
  Matrix stacked(t.P * t.R, t.Q);
  for (long r = 0; r < t.R; ++r)
    stacked.block(r * t.P, 0, t.P, t.Q) = t.slabs[static_cast<std::size_t>(r)];
  write_matrix_csv((fs::path(dir) / "slabs.csv").string(), stacked);
}

inline SignalTensor load_tensor(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mi(fs::path(dir) / "tensor_meta.json");
  if (!mi)
    throw Error(Errc::io_format, "cannot open tensor meta in '" + dir + "'");
  nlohmann::json meta;
  try {
    mi >> meta;
  } catch (const std::exception& e) {
    throw Error(Errc::io_format, "tensor meta parse failure: " + std::string(e.what()));
  }
  SignalTensor t;
  try {
    t.P = meta.at("P").get<long>();
    t.Q = meta.at("Q").get<long>();
    t.R = meta.at("R").get<long>();
    t.generator = generator_from_name(meta.at("generator").get<std::string>());
    t.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::schema_mismatch, "tensor meta: " + std::string(e.what()));
  }
  if (t.P < 1 || t.Q < 1 || t.R < 1)
    throw Error(Errc::schema_mismatch, "tensor meta dimensions must be positive");
  Matrix stacked = read_matrix_csv((fs::path(dir) / "slabs.csv").string());
  if (stacked.rows() != t.P * t.R || stacked.cols() != t.Q)
    throw Error(Errc::dimension_mismatch,
                "slabs.csv is " + std::to_string(stacked.rows()) + "x" +
                    std::to_string(stacked.cols()) + ", meta expects " +
                    std::to_string(t.P * t.R) + "x" + std::to_string(t.Q));
  t.slabs.reserve(static_cast<std::size_t>(t.R));
  for (long r = 0; r < t.R; ++r)
    t.slabs.emplace_back(stacked.block(r * t.P, 0, t.P, t.Q));
  return t;
}

}  // namespace prodgraph
