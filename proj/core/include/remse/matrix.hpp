#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace remse {

/// Dense row-major matrix of 64-bit floats. All reductions over its entries
/// run in row-major order so results are bit-stable across runs.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double c);

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Standard product; accumulates each output entry in index order.
/// Throws ShapeError naming both shapes on a dimension mismatch and
/// NumericError if the result is not finite.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

/// sqrt(sum of squares), accumulated left to right.
double l2_norm(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);

double frobenius_norm(const Matrix& m);

std::string shape_string(const Matrix& m);

}  // namespace remse
