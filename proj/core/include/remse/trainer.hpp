#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "remse/dataset.hpp"
#include "remse/losses.hpp"
#include "remse/matrix.hpp"

namespace remse {

enum class LossKind { sce, sce_nmse, sce_remse, sce_balmse, nmse, remse };

LossKind parse_loss_kind(const std::string& name);  // throws ConfigError on unknown names
const char* loss_kind_name(LossKind kind);

struct TrainConfig {
  LossKind loss = LossKind::sce_remse;
  LossConfig loss_cfg;
  double alpha = 1.0;
  double beta = 1.0;
  double eps = 1e-12;
  std::optional<double> ema_mu;  // off: factors come from the current batch alone
  double learning_rate = 0.01;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 7;
  double init_scale = 1.0;

  void validate() const;
};

struct EpochRecord {
  double loss = 0.0;       // mean over the epoch's batches
  double err_mean = 0.0;   // over the epoch's pooled error matrix
  double err_std = 0.0;
  double pcc = 0.0;        // NaN when undefined (degenerate matrix)
  double grad_norm = 0.0;  // mean Frobenius norm of the applied gradients
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

struct LinearEmbedding {
  Matrix W;  // d_s x d_v
};

struct TrainResult {
  LinearEmbedding model;
  TrainTrace trace;
};

/// Assembles a batch from dataset rows: features, raw/normalized targets,
/// labels, and each label's row in the seen table (-1 for unseen labels).
TrainingBatch make_batch(const Dataset& ds, const Matrix& table_norm,
                         const Matrix& table_raw_masked, std::span<const std::size_t> indices,
                         const std::vector<int>& global_to_seen);

/// Mini-batch gradient descent on the configured loss. Every batch refreshes
/// the class-averaged error matrix and, for the reweighted losses, the
/// factors derived from it before the step is applied. Deterministic in
/// (dataset, config). Throws NumericError naming the step on divergence.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

void save_trace_csv(const TrainTrace& trace, const std::filesystem::path& path);

void save_model(const LinearEmbedding& model, const TrainConfig& cfg,
                const std::filesystem::path& path);

struct LoadedModel {
  LinearEmbedding model;
  TrainConfig config;
};

LoadedModel load_model(const std::filesystem::path& path);

/// One step of the two-sample 1-D reweighted descent. Weights are the
/// class-level factors of the 2-cell error column; the semantic-level
/// factor is identically 1 in one dimension.
struct TheoremStep {
  double error_x = 0.0;
  double error_y = 0.0;
  double weight_x = 1.0;
  double weight_y = 1.0;
};

struct TheoremTrajectory {
  std::vector<TheoremStep> steps;  // steps + 1 records, step t first
};

/// Reweighted descent on two scalar predictions with weights recomputed
/// from the current errors each step. Aborts with NumericError naming the
/// step if the contraction condition (1 - 2 r weight)^2 < 1 fails.
TheoremTrajectory demo_theorem_b(double x_pred0, double y_pred0, double x_target,
                                 double y_target, double learning_rate, double alpha, int steps);

struct DescentSample {
  double pred_norm = 0.0;        // |Wv|
  double target_norm_cos = 0.0;  // |s| cos(theta)
  double gap = 0.0;
};

struct DescentReport {
  Matrix W;
  long steps_taken = 0;
  double grad_norm = 0.0;
  std::vector<DescentSample> samples;
};

/// Plain-MSE gradient descent from W = 0 until the gradient norm falls
/// below grad_tol; throws NumericError if the budget runs out.
DescentReport run_mse_descent(const Matrix& features, const Matrix& targets_raw,
                              double learning_rate, double grad_tol, long max_steps);

/// The fixed conflicting-targets instance: one scalar input mapped to two
/// incompatible targets. At the optimum the prediction norm collapses to
/// |s| cos(theta) for every sample.
DescentReport demo_proposition_a();

}  // namespace remse
