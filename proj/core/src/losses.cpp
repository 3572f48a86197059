#include "remse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "remse/error.hpp"
#include "remse/rebalance.hpp"

namespace remse {

namespace {

void require_nonempty(const TrainingBatch& batch, const char* where) {
  if (batch.size() == 0) throw DataError(std::string(where) + ": empty batch");
}

double row_norm_checked(const Matrix& m, std::size_t i, const char* where) {
  const double norm = l2_norm(m.row(i));
  if (norm == 0.0) {
    throw NumericError(std::string(where) + ": zero-norm prediction for instance " +
                       std::to_string(i));
  }
  return norm;
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double acc = 0.0;
  for (double v : z) acc += std::exp(v - m);
  return m + std::log(acc);
}

// d(loss)/d(prediction row) folded through row-wise normalization:
// given g = d(loss)/d(normalized prediction), returns
// (g - <t, g> t) / |s| where t is the normalized prediction.
void chain_through_normalization(std::span<const double> pred_norm_row,
                                 std::span<const double> g, double norm,
                                 std::span<double> out) {
  const double along = dot(pred_norm_row, g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    out[j] = (g[j] - along * pred_norm_row[j]) / norm;
  }
}

void add_outer_product(Matrix& grad, std::span<const double> left,
                       std::span<const double> right) {
  for (std::size_t r = 0; r < left.size(); ++r) {
    const double lv = left[r];
    for (std::size_t c = 0; c < right.size(); ++c) grad(r, c) += lv * right[c];
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("loss config: tau must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("loss config: lambda must be >= 0");
  if (!(sigma > 0.0)) throw ConfigError("loss config: sigma must be > 0");
}

Matrix predict(const Matrix& W, const Matrix& features) {
  return matmul(features, transpose(W));
}

std::vector<double> class_probabilities(std::span<const double> prediction,
                                        const Matrix& table_norm, double tau) {
  if (prediction.size() != table_norm.cols()) {
    throw ShapeError("class_probabilities: prediction dim " + std::to_string(prediction.size()) +
                     " != table dim " + std::to_string(table_norm.cols()));
  }
  const double norm = l2_norm(prediction);
  if (norm == 0.0) throw NumericError("class_probabilities: zero prediction vector");
  std::vector<double> logits(table_norm.rows());
  for (std::size_t c = 0; c < table_norm.rows(); ++c) {
    logits[c] = tau * dot(prediction, table_norm.row(c)) / norm;
  }
  const double lse = log_sum_exp(logits);
  std::vector<double> probs(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) probs[c] = std::exp(logits[c] - lse);
  return probs;
}

namespace {

int seen_row_checked(const TrainingBatch& batch, std::size_t i) {
  const int row = batch.seen_rows[i];
  if (row < 0) {
    throw DataError("sce: instance " + std::to_string(i) + " labeled with class " +
                    std::to_string(batch.labels[i]) + " outside the seen set");
  }
  return row;
}

}  // namespace

double sce_loss(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                double tau) {
  require_nonempty(batch, "sce");
  const Matrix pred = predict(W, batch.features);
  double acc = 0.0;
  std::vector<double> logits(seen_table_norm.rows());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int y = seen_row_checked(batch, i);
    const double norm = row_norm_checked(pred, i, "sce");
    for (std::size_t c = 0; c < seen_table_norm.rows(); ++c) {
      logits[c] = tau * dot(pred.row(i), seen_table_norm.row(c)) / norm;
    }
    acc += log_sum_exp(logits) - logits[static_cast<std::size_t>(y)];
  }
  return acc / static_cast<double>(batch.size());
}

Matrix sce_grad(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                double tau) {
  require_nonempty(batch, "sce");
  const Matrix pred = predict(W, batch.features);
  const std::size_t d_s = W.rows();
  Matrix grad(W.rows(), W.cols());
  std::vector<double> pred_norm(d_s), g_norm(d_s), g_pred(d_s);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int y = seen_row_checked(batch, i);
    const double norm = row_norm_checked(pred, i, "sce");
    for (std::size_t j = 0; j < d_s; ++j) pred_norm[j] = pred(i, j) / norm;

    const auto probs = class_probabilities(pred.row(i), seen_table_norm, tau);
    // d(loss)/d(normalized prediction) = tau * sum_c (p_c - [c == y]) t_c
    std::fill(g_norm.begin(), g_norm.end(), 0.0);
    for (std::size_t c = 0; c < seen_table_norm.rows(); ++c) {
      const double a = probs[c] - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0);
      const auto t_c = seen_table_norm.row(c);
      for (std::size_t j = 0; j < d_s; ++j) g_norm[j] += a * t_c[j];
    }
    for (double& v : g_norm) v *= tau;
    chain_through_normalization(pred_norm, g_norm, norm, g_pred);
    add_outer_product(grad, g_pred, batch.features.row(i));
  }
  grad *= 1.0 / static_cast<double>(batch.size());
  return grad;
}

double mse_loss(const Matrix& W, const TrainingBatch& batch) {
  require_nonempty(batch, "mse");
  const Matrix pred = predict(W, batch.features);
  if (!pred.same_shape(batch.targets_raw)) {
    throw ShapeError("mse: prediction shape " + shape_string(pred) + " != target shape " +
                     shape_string(batch.targets_raw));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    for (std::size_t j = 0; j < pred.cols(); ++j) {
      const double d = pred(i, j) - batch.targets_raw(i, j);
      acc += d * d;
    }
  }
  return acc / static_cast<double>(batch.size());
}

Matrix mse_grad(const Matrix& W, const TrainingBatch& batch) {
  require_nonempty(batch, "mse");
  const Matrix pred = predict(W, batch.features);
  Matrix grad(W.rows(), W.cols());
  std::vector<double> g(W.rows());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = 0; j < W.rows(); ++j) {
      g[j] = 2.0 * (pred(i, j) - batch.targets_raw(i, j));
    }
    add_outer_product(grad, g, batch.features.row(i));
  }
  grad *= 1.0 / static_cast<double>(batch.size());
  return grad;
}

namespace {

// Residuals e_ij = (t'_ij - t_ij)^2 between row-normalized predictions and
// the already-normalized targets.
BatchErrors normalized_residuals(const Matrix& pred, const TrainingBatch& batch,
                                 const char* where) {
  BatchErrors out;
  out.labels = batch.labels;
  out.residuals_sq = Matrix(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    const double norm = row_norm_checked(pred, i, where);
    for (std::size_t j = 0; j < pred.cols(); ++j) {
      const double d = pred(i, j) / norm - batch.targets_norm(i, j);
      out.residuals_sq(i, j) = d * d;
    }
  }
  return out;
}

// Shared weighted kernel: with unit weights this IS the plain normalized
// loss, bit for bit, because x * 1.0 == x and the accumulation order is
// identical.
template <typename WeightFn>
double weighted_normalized_loss(const BatchErrors& errors, WeightFn&& weight) {
  double acc = 0.0;
  const Matrix& e = errors.residuals_sq;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    const int label = errors.labels[i];
    for (std::size_t j = 0; j < e.cols(); ++j) acc += weight(label, j) * e(i, j);
  }
  return acc / static_cast<double>(e.rows());
}

template <typename WeightFn>
Matrix weighted_normalized_grad(const Matrix& W, const TrainingBatch& batch, WeightFn&& weight,
                                const char* where) {
  const Matrix pred = predict(W, batch.features);
  const std::size_t d_s = W.rows();
  Matrix grad(W.rows(), W.cols());
  std::vector<double> pred_norm(d_s), g_norm(d_s), g_pred(d_s);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double norm = row_norm_checked(pred, i, where);
    for (std::size_t j = 0; j < d_s; ++j) pred_norm[j] = pred(i, j) / norm;
    const int label = batch.labels[i];
    for (std::size_t j = 0; j < d_s; ++j) {
      g_norm[j] = 2.0 * weight(label, j) * (pred_norm[j] - batch.targets_norm(i, j));
    }
    chain_through_normalization(pred_norm, g_norm, norm, g_pred);
    add_outer_product(grad, g_pred, batch.features.row(i));
  }
  grad *= 1.0 / static_cast<double>(batch.size());
  return grad;
}

}  // namespace

NmseResult nmse_loss(const Matrix& W, const TrainingBatch& batch) {
  require_nonempty(batch, "nmse");
  const Matrix pred = predict(W, batch.features);
  if (!pred.same_shape(batch.targets_norm)) {
    throw ShapeError("nmse: prediction shape " + shape_string(pred) + " != target shape " +
                     shape_string(batch.targets_norm));
  }
  NmseResult result;
  result.errors = normalized_residuals(pred, batch, "nmse");
  result.value =
      weighted_normalized_loss(result.errors, [](int, std::size_t) { return 1.0; });
  return result;
}

Matrix nmse_grad(const Matrix& W, const TrainingBatch& batch) {
  require_nonempty(batch, "nmse");
  return weighted_normalized_grad(
      W, batch, [](int, std::size_t) { return 1.0; }, "nmse");
}

double balanced_mse_loss(const Matrix& W, const TrainingBatch& batch, double sigma) {
  require_nonempty(batch, "balanced_mse");
  if (!(sigma > 0.0)) throw ConfigError("balanced_mse: sigma must be > 0");
  const Matrix pred = predict(W, batch.features);
  const std::size_t n = batch.size();
  const std::size_t d_s = pred.cols();
  double acc = 0.0;
  std::vector<double> pred_norm(d_s), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = row_norm_checked(pred, i, "balanced_mse");
    for (std::size_t j = 0; j < d_s; ++j) pred_norm[j] = pred(i, j) / norm;
    for (std::size_t other = 0; other < n; ++other) {
      double dist_sq = 0.0;
      for (std::size_t j = 0; j < d_s; ++j) {
        const double d = pred_norm[j] - batch.targets_norm(other, j);
        dist_sq += d * d;
      }
      z[other] = -dist_sq / sigma;
    }
    acc += log_sum_exp(z) - z[i];
  }
  return acc / static_cast<double>(n);
}

Matrix balanced_mse_grad(const Matrix& W, const TrainingBatch& batch, double sigma) {
  require_nonempty(batch, "balanced_mse");
  if (!(sigma > 0.0)) throw ConfigError("balanced_mse: sigma must be > 0");
  const Matrix pred = predict(W, batch.features);
  const std::size_t n = batch.size();
  const std::size_t d_s = pred.cols();
  Matrix grad(W.rows(), W.cols());
  std::vector<double> pred_norm(d_s), z(n), g_norm(d_s), g_pred(d_s);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = row_norm_checked(pred, i, "balanced_mse");
    for (std::size_t j = 0; j < d_s; ++j) pred_norm[j] = pred(i, j) / norm;
    for (std::size_t other = 0; other < n; ++other) {
      double dist_sq = 0.0;
      for (std::size_t j = 0; j < d_s; ++j) {
        const double d = pred_norm[j] - batch.targets_norm(other, j);
        dist_sq += d * d;
      }
      z[other] = -dist_sq / sigma;
    }
    const double lse = log_sum_exp(z);
    // d(loss_i)/d(normalized prediction) = (2/sigma) (sum_j P_j t_j - t_i)
    for (std::size_t j = 0; j < d_s; ++j) g_norm[j] = -batch.targets_norm(i, j);
    for (std::size_t other = 0; other < n; ++other) {
      const double p = std::exp(z[other] - lse);
      for (std::size_t j = 0; j < d_s; ++j) g_norm[j] += p * batch.targets_norm(other, j);
    }
    for (double& v : g_norm) v *= 2.0 / sigma;
    chain_through_normalization(pred_norm, g_norm, norm, g_pred);
    add_outer_product(grad, g_pred, batch.features.row(i));
  }
  grad *= 1.0 / static_cast<double>(n);
  return grad;
}

double remse_loss(const BatchErrors& errors, const ReweightFactors& factors) {
  if (errors.residuals_sq.rows() == 0) throw DataError("remse: empty batch");
  if (errors.residuals_sq.cols() != factors.semantics()) {
    throw ShapeError("remse: residual dim " + std::to_string(errors.residuals_sq.cols()) +
                     " != factor dim " + std::to_string(factors.semantics()));
  }
  return weighted_normalized_loss(
      errors, [&factors](int label, std::size_t j) { return factors.weight(label, j); });
}

Matrix remse_grad(const Matrix& W, const TrainingBatch& batch, const ReweightFactors& factors) {
  require_nonempty(batch, "remse");
  return weighted_normalized_grad(
      W, batch, [&factors](int label, std::size_t j) { return factors.weight(label, j); },
      "remse");
}

double combined_loss(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                     const LossConfig& cfg, const ReweightFactors& factors) {
  const double sce = sce_loss(W, batch, seen_table_norm, cfg.tau);
  const auto nmse = nmse_loss(W, batch);
  return sce + cfg.lambda * remse_loss(nmse.errors, factors);
}

Matrix combined_grad(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                     const LossConfig& cfg, const ReweightFactors& factors) {
  Matrix grad = sce_grad(W, batch, seen_table_norm, cfg.tau);
  Matrix reg = remse_grad(W, batch, factors);
  reg *= cfg.lambda;
  grad += reg;
  return grad;
}

}  // namespace remse
