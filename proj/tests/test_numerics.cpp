#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "remse/error.hpp"
#include "remse/grad_check.hpp"
#include "remse/matrix.hpp"
#include "remse/rng.hpp"
#include "test_util.hpp"

using namespace remse;
using remse::testing::expect_matrix_near;
using remse::testing::random_matrix;

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Matrix result = matmul(Matrix::identity(2), a);
  EXPECT_EQ(result, a);
}

TEST(Matmul, HandComputedInnerProduct) {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}});
  const Matrix b = Matrix::from_rows({{3.0}, {4.0}});
  const Matrix result = matmul(a, b);
  ASSERT_EQ(result.rows(), 1u);
  ASSERT_EQ(result.cols(), 1u);
  EXPECT_DOUBLE_EQ(result(0, 0), 11.0);  // 1*3 + 2*4
}

TEST(Matmul, ZeroMatrixAnnihilates) {
  Rng rng(1);
  const Matrix zero(2, 3);
  const Matrix b = random_matrix(rng, 3, 4);
  const Matrix result = matmul(zero, b);
  for (std::size_t i = 0; i < result.size(); ++i) EXPECT_EQ(result.data()[i], 0.0);
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  const Matrix a(2, 3);
  const Matrix b(4, 5);
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2x3)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(4x5)"), std::string::npos) << msg;
  }
}

TEST(Matmul, AssociativeOnRandomTriples) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 4, 4);
    const Matrix b = random_matrix(rng, 4, 4);
    const Matrix c = random_matrix(rng, 4, 4);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      const double scale = std::max(1.0, std::abs(left.data()[i]));
      EXPECT_NEAR(left.data()[i], right.data()[i], 1e-9 * scale);
    }
  }
}

TEST(L2Norm, PythagoreanTriple) {
  const std::vector<double> v{3.0, 4.0};
  EXPECT_DOUBLE_EQ(l2_norm(v), 5.0);
}

TEST(L2Norm, ZeroVector) {
  const std::vector<double> v{0.0, 0.0};
  EXPECT_DOUBLE_EQ(l2_norm(v), 0.0);
}

TEST(L2Norm, FourOnes) {
  const std::vector<double> v{1.0, 1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(l2_norm(v), 2.0);
}

TEST(L2Norm, ScaleEquivariance) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(8);
    for (double& x : v) x = rng.uniform(-10.0, 10.0);
    const double c = rng.uniform(-5.0, 5.0);
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= c;
    EXPECT_NEAR(l2_norm(scaled), std::abs(c) * l2_norm(v), 1e-12 * std::max(1.0, l2_norm(v)));
  }
}

TEST(FiniteDifference, QuadraticGradient) {
  const Matrix x = Matrix::from_rows({{1.0, 2.0}});
  const auto f = [](const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i] * m.data()[i];
    return acc;
  };
  const Matrix grad = finite_difference_grad(f, x, 1e-5);
  expect_matrix_near(grad, Matrix::from_rows({{2.0, 4.0}}), 1e-6);
}

TEST(FiniteDifference, ConstantFunctionHasZeroGradient) {
  const Matrix x = Matrix::from_rows({{1.0, -3.0}, {0.5, 2.0}});
  const Matrix grad = finite_difference_grad([](const Matrix&) { return 4.2; }, x, 1e-5);
  for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_EQ(grad.data()[i], 0.0);
}

TEST(FiniteDifference, LinearSumHasUnitGradient) {
  Rng rng(3);
  const Matrix x = random_matrix(rng, 3, 2, -2.0, 2.0);
  const auto f = [](const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i];
    return acc;
  };
  const Matrix grad = finite_difference_grad(f, x, 1e-5);
  expect_matrix_near(grad, Matrix(3, 2, 1.0), 1e-8);
}

TEST(FiniteDifference, NonFiniteEvaluationThrows) {
  const Matrix x = Matrix::from_rows({{0.0}});
  const auto f = [](const Matrix& m) { return 1.0 / m(0, 0); };
  EXPECT_THROW(finite_difference_grad(f, x, 0.5), NumericError);
}

TEST(FiniteDifference, RejectsNonPositiveStep) {
  const Matrix x(1, 1);
  EXPECT_THROW(finite_difference_grad([](const Matrix&) { return 0.0; }, x, 0.0), ConfigError);
}

TEST(Rng, EqualSeedsReproduceDrawSequence) {
  Rng a(123456789);
  Rng b(123456789);
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctSeedsDiverge) {
  Rng a(1);
  Rng b(2);
  bool differ = false;
  for (int i = 0; i < 16 && !differ; ++i) differ = a.next_u64() != b.next_u64();
  EXPECT_TRUE(differ);
}

TEST(Rng, UniformStaysInRange) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-2.0, 3.0);
    EXPECT_GE(x, -2.0);
    EXPECT_LT(x, 3.0);
  }
}

TEST(Rng, ShuffleIsSeedDeterministicPermutation) {
  std::vector<int> base(50);
  for (int i = 0; i < 50; ++i) base[i] = i;
  std::vector<int> first = base;
  std::vector<int> second = base;
  Rng a(99);
  Rng b(99);
  a.shuffle(first);
  b.shuffle(second);
  EXPECT_EQ(first, second);
  std::vector<int> sorted = first;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, base);
}

TEST(Rng, LogUniformStaysInRange) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.log_uniform(0.1, 100.0);
    EXPECT_GE(x, 0.1 * (1.0 - 1e-12));
    EXPECT_LE(x, 100.0 * (1.0 + 1e-12));
  }
}
