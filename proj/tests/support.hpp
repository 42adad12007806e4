#pragma once

#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing_support {

using metabench::Index;
using metabench::Labels;
using metabench::Matrix;

inline Matrix random_matrix(Index rows, Index cols, metabench::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Labels with exactly n0 zeros and n1 ones in shuffled order.
inline Labels shuffled_labels(std::size_t n0, std::size_t n1, metabench::Rng& rng) {
  Labels y(n0, 0);
  y.insert(y.end(), n1, 1);
  rng.shuffle(y);
  return y;
}

// Two Gaussian blobs separated along every axis by `shift`.
inline Matrix blobs(const Labels& y, Index cols, double shift, metabench::Rng& rng) {
  Matrix m(static_cast<Index>(y.size()), cols);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal() + (y[static_cast<std::size_t>(i)] == 1 ? shift : 0.0);
  return m;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(METABENCH_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Runs the CLI binary; returns its exit status.
inline int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(METABENCH_CLI) + " " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace testing_support
