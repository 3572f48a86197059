#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "remse/dataset.hpp"
#include "remse/matrix.hpp"
#include "remse/rebalance.hpp"

namespace remse {

/// Nearest class by cosine similarity, with a calibrated-stacking bias
/// subtracted from seen-class scores. Ties go to the lowest row index.
/// Returns a row index into the candidate table.
int classify(std::span<const double> prediction, const Matrix& candidates_norm,
             const std::vector<bool>& seen_flags, double seen_bias);

/// Mean over the classes in class_set of that class's own accuracy.
/// Throws DataError if any class in the set has no instances.
double per_class_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                          const std::vector<int>& class_set);

/// 2US / (U + S); zero when both inputs are zero.
double harmonic_mean(double u, double s);

/// Per-instance best seen / best unseen cosine scores over the GZSL test
/// set; everything a bias sweep needs.
struct GzslScores {
  std::vector<double> best_seen_score;
  std::vector<double> best_unseen_score;
  std::vector<int> best_seen_class;    // global class id
  std::vector<int> best_unseen_class;  // global class id
  std::vector<int> labels;
  std::vector<bool> from_unseen_split;
  std::vector<int> seen_class_ids;
  std::vector<int> unseen_class_ids;
};

GzslScores compute_gzsl_scores(const Matrix& W, const Dataset& ds);

/// Every observed decision boundary: midpoints of the sorted per-instance
/// score gaps (best seen - best unseen), bracketed by -inf and +inf.
std::vector<double> derive_gamma_grid(const GzslScores& scores);

struct AusucResult {
  double area = 0.0;
  std::vector<std::array<double, 2>> curve;  // (S, U), sorted by S
};

/// Seen/unseen accuracy trade-off traced by the bias grid; area by the
/// trapezoid rule over the curve sorted by S.
AusucResult ausuc(const GzslScores& scores, std::vector<double> grid);
AusucResult ausuc(const Matrix& W, const Dataset& ds);

struct MetricsReport {
  double t1 = 0.0;     // ZSL: unseen instances, unseen candidates only
  double u = 0.0;      // GZSL unseen accuracy at zero bias
  double s = 0.0;      // GZSL seen accuracy at zero bias
  double h = 0.0;
  double ausuc = 0.0;
  double pcc = 0.0;    // NaN when undefined
  double err_mean = 0.0;
  double err_std = 0.0;
};

/// Class-averaged error matrix over the given splits of the dataset.
ErrorMatrix split_error_matrix(const Matrix& W, const Dataset& ds,
                               const std::vector<Split>& splits);

/// Full protocol on the test splits: ZSL T1, GZSL U/S/H, AUSUC, and the
/// imbalance diagnostics of the test-set error matrix.
MetricsReport evaluate(const Matrix& W, const Dataset& ds);

void save_metrics_json(const MetricsReport& report, const std::filesystem::path& path);
void save_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
void save_curve_csv(const AusucResult& result, const std::filesystem::path& path);

}  // namespace remse
