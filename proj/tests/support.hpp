#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "rd/linalg.hpp"

namespace rdtest {

inline rd::DenseMatrix random_matrix(rd::index_t rows, rd::index_t cols,
                                     rd::Rng& rng, double scale = 1.0) {
  rd::DenseMatrix m(rows, cols);
  for (double& v : m.mutable_data()) v = scale * rng.next_gaussian();
  return m;
}

inline rd::DenseMatrix random_symmetric(rd::index_t n, rd::Rng& rng) {
  rd::DenseMatrix m(n, n);
  for (rd::index_t i = 0; i < n; ++i)
    for (rd::index_t j = i; j < n; ++j) {
      const double v = rng.next_gaussian();
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

inline rd::DenseMatrix random_psd(rd::index_t n, rd::Rng& rng) {
  return rd::gram(random_matrix(n, n, rng));
}

inline double rel_err(double got, double want) {
  const double denom = std::max({std::abs(got), std::abs(want), 1e-300});
  return std::abs(got - want) / denom;
}

/// Fresh path under the system temp directory; caller removes it.
inline std::filesystem::path temp_path(const std::string& stem) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         (stem + "_" + std::to_string(++counter) + "_" +
          std::to_string(::getpid()));
}

}  // namespace rdtest
