#pragma once

#include <gtest/gtest.h>

#include <cmath>

#include "remse/matrix.hpp"
#include "remse/rng.hpp"

namespace remse::testing {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline void expect_matrix_near(const Matrix& actual, const Matrix& expected, double tol) {
  ASSERT_EQ(actual.rows(), expected.rows());
  ASSERT_EQ(actual.cols(), expected.cols());
  for (std::size_t r = 0; r < actual.rows(); ++r) {
    for (std::size_t c = 0; c < actual.cols(); ++c) {
      EXPECT_NEAR(actual(r, c), expected(r, c), tol) << "entry (" << r << "," << c << ")";
    }
  }
}

}  // namespace remse::testing
