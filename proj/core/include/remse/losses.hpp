#pragma once

#include <span>
#include <vector>

#include "remse/matrix.hpp"

namespace remse {

struct ReweightFactors;  // rebalance.hpp

struct LossConfig {
  double tau = 20.0;     // cosine-logit scale
  double lambda = 1.0;   // regression-term mixing weight
  double sigma = 1.0;    // batch-softmax temperature of the balanced baseline

  void validate() const;  // tau > 0, lambda >= 0, sigma > 0
};

/// One mini-batch, assembled once: features, raw and unit-normalized
/// semantic targets, global labels, and each label's row in the seen table
/// (-1 if the label is not a seen class).
struct TrainingBatch {
  Matrix features;      // N x d_v
  Matrix targets_raw;   // N x d_s
  Matrix targets_norm;  // N x d_s, rows unit norm
  std::vector<int> labels;
  std::vector<int> seen_rows;

  std::size_t size() const { return features.rows(); }
};

/// Per-instance, per-semantic squared residuals in normalized space,
/// e_ij = (t'_ij - t_ij)^2, with the labels needed to pool them by class.
struct BatchErrors {
  Matrix residuals_sq;  // N x d_s
  std::vector<int> labels;
};

/// Row-wise linear prediction: row i of the result is W * features_i.
Matrix predict(const Matrix& W, const Matrix& features);

/// softmax over tau * cos(prediction, class vector) for every row of the
/// normalized candidate table. Entries are positive and sum to 1.
std::vector<double> class_probabilities(std::span<const double> prediction,
                                        const Matrix& table_norm, double tau);

double sce_loss(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                double tau);
Matrix sce_grad(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                double tau);

double mse_loss(const Matrix& W, const TrainingBatch& batch);
Matrix mse_grad(const Matrix& W, const TrainingBatch& batch);

struct NmseResult {
  double value = 0.0;
  BatchErrors errors;
};

/// Mean squared error between normalized predictions and normalized targets.
/// Per sample it equals 2 - 2 cos(theta).
NmseResult nmse_loss(const Matrix& W, const TrainingBatch& batch);
Matrix nmse_grad(const Matrix& W, const TrainingBatch& batch);

/// Batch-softmax regression baseline: negative log of the normalized-target
/// likelihood against every label in the batch.
double balanced_mse_loss(const Matrix& W, const TrainingBatch& batch, double sigma);
Matrix balanced_mse_grad(const Matrix& W, const TrainingBatch& batch, double sigma);

/// (1/N) sum_ij p q e with the factors treated as constants. With all
/// factors equal to 1 this reproduces nmse_loss bit for bit.
double remse_loss(const BatchErrors& errors, const ReweightFactors& factors);
Matrix remse_grad(const Matrix& W, const TrainingBatch& batch, const ReweightFactors& factors);

/// sce + lambda * remse, the full training objective.
double combined_loss(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                     const LossConfig& cfg, const ReweightFactors& factors);
Matrix combined_grad(const Matrix& W, const TrainingBatch& batch, const Matrix& seen_table_norm,
                     const LossConfig& cfg, const ReweightFactors& factors);

}  // namespace remse
