#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "remse/losses.hpp"
#include "remse/matrix.hpp"

namespace remse {

enum class ErrorScope { batch, evaluation };

/// Class-averaged semantic error matrix: cell (l, j) is the mean of e_ij
/// over instances of class l, with the contributing sample count per cell.
/// Cells with no contributions are absent and never read as zero.
class ErrorMatrix {
public:
  ErrorMatrix() = default;
  ErrorMatrix(std::size_t classes, std::size_t semantics, ErrorScope scope)
      : mean_(classes, semantics), counts_(classes * semantics, 0), scope_(scope) {}

  std::size_t classes() const { return mean_.rows(); }
  std::size_t semantics() const { return mean_.cols(); }
  ErrorScope scope() const { return scope_; }

  bool present(std::size_t l, std::size_t j) const {
    return counts_[l * semantics() + j] > 0;
  }
  long count(std::size_t l, std::size_t j) const { return counts_[l * semantics() + j]; }

  /// Mean error of a present cell; throws NumericError on an absent cell.
  double value(std::size_t l, std::size_t j) const;

  void set_cell(std::size_t l, std::size_t j, double mean, long count);

private:
  Matrix mean_;
  std::vector<long> counts_;
  ErrorScope scope_ = ErrorScope::batch;
};

/// Streams batch residuals into per-cell sums; finalize() divides by counts.
class ErrorAccumulator {
public:
  ErrorAccumulator(std::size_t classes, std::size_t semantics)
      : sums_(classes, semantics), counts_(classes, 0) {}

  void add(const BatchErrors& errors);
  ErrorMatrix finalize(ErrorScope scope) const;

private:
  Matrix sums_;
  std::vector<long> counts_;  // per class; every semantic of a class shares one count
};

ErrorMatrix accumulate(const BatchErrors& errors, std::size_t class_count, ErrorScope scope);

/// The paired factor matrices. p compares a cell against the smallest error
/// in its column (across classes), q against the smallest in its row (across
/// semantics): factor = (log(m / min) + 1)^exponent, never below 1.
struct ReweightFactors {
  Matrix p;
  Matrix q;
  double alpha = 1.0;
  double beta = 1.0;
  double eps = 1e-12;

  std::size_t classes() const { return p.rows(); }
  std::size_t semantics() const { return p.cols(); }

  double weight(int label, std::size_t j) const;

  static ReweightFactors unit(std::size_t classes, std::size_t semantics);
};

/// Factors from an error matrix. Mins run over present cells only; absent
/// cells and empty rows/columns yield factor 1. eps floors the means so a
/// perfectly fit cell cannot zero the denominator.
ReweightFactors compute_factors(const ErrorMatrix& m, double alpha, double beta, double eps);

/// Blend of two matrices: mu * running + (1 - mu) * batch on cells present
/// in both; one-sided cells keep the side that has data.
ErrorMatrix ema_update(const ErrorMatrix& running, const ErrorMatrix& batch, double mu);

/// Pearson correlation between normalized label values t_lj and mean errors
/// m_lj over present cells. Throws NumericError when fewer than two cells
/// are present or either series is constant.
double pearson_correlation(const ErrorMatrix& m, const Matrix& table_norm);

struct MatrixStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

MatrixStats matrix_stats(const ErrorMatrix& m);

/// Writes <base>.csv (log-rescaled values, absent cells empty) and
/// <base>.svg (one rect per cell, light gray for the smallest error through
/// red for the largest, white for absent).
void export_heatmap(const ErrorMatrix& m, const std::vector<std::string>& semantic_names,
                    const std::filesystem::path& base_path);

}  // namespace remse
