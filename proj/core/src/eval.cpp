#include "remse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "json.hpp"
#include "remse/error.hpp"
#include "remse/losses.hpp"
#include "remse/text.hpp"

namespace remse {

int classify(std::span<const double> prediction, const Matrix& candidates_norm,
             const std::vector<bool>& seen_flags, double seen_bias) {
  if (candidates_norm.rows() == 0) throw DataError("classify: empty candidate table");
  if (seen_flags.size() != candidates_norm.rows()) {
    throw ShapeError("classify: " + std::to_string(seen_flags.size()) + " seen flags for " +
                     std::to_string(candidates_norm.rows()) + " candidates");
  }
  if (prediction.size() != candidates_norm.cols()) {
    throw ShapeError("classify: prediction dim " + std::to_string(prediction.size()) +
                     " != candidate dim " + std::to_string(candidates_norm.cols()));
  }
  const double norm = l2_norm(prediction);
  if (norm == 0.0) throw NumericError("classify: zero prediction vector");

  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates_norm.rows(); ++c) {
    double score = dot(prediction, candidates_norm.row(c)) / norm;
    if (seen_flags[c]) score -= seen_bias;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double per_class_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                          const std::vector<int>& class_set) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("per_class_accuracy: " + std::to_string(predictions.size()) +
                     " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  if (class_set.empty()) throw DataError("per_class_accuracy: empty class set");
  double acc_sum = 0.0;
  for (int cls : class_set) {
    long total = 0;
    long correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != cls) continue;
      ++total;
      if (predictions[i] == cls) ++correct;
    }
    if (total == 0) throw DataError("per_class_accuracy: class " + std::to_string(cls) +
                                    " has no instances");
    acc_sum += static_cast<double>(correct) / static_cast<double>(total);
  }
  return acc_sum / static_cast<double>(class_set.size());
}

double harmonic_mean(double u, double s) {
  if (u + s == 0.0) return 0.0;
  return 2.0 * u * s / (u + s);
}

GzslScores compute_gzsl_scores(const Matrix& W, const Dataset& ds) {
  const Matrix table_norm = normalize_semantics(ds.table);
  GzslScores out;
  out.seen_class_ids = ds.manifest.seen_class_ids;
  out.unseen_class_ids = ds.manifest.unseen_class_ids;
  if (out.seen_class_ids.empty() || out.unseen_class_ids.empty()) {
    throw DataError("gzsl scores: need both seen and unseen classes");
  }

  std::vector<std::size_t> indices = ds.manifest.test_seen_indices;
  indices.insert(indices.end(), ds.manifest.test_unseen_indices.begin(),
                 ds.manifest.test_unseen_indices.end());
  if (indices.empty()) throw DataError("gzsl scores: empty test split");

  std::vector<double> pred(table_norm.cols());
  for (std::size_t idx : indices) {
    const auto v = ds.store.features.row(idx);
    for (std::size_t j = 0; j < pred.size(); ++j) pred[j] = dot(W.row(j), v);
    const double norm = l2_norm(pred);
    if (norm == 0.0) {
      throw NumericError("gzsl scores: zero prediction for instance " + std::to_string(idx));
    }
    auto best_over = [&](const std::vector<int>& ids, int& best_class) {
      double best = -std::numeric_limits<double>::infinity();
      best_class = ids.front();
      for (int id : ids) {
        const double cos =
            dot(pred, table_norm.row(static_cast<std::size_t>(id))) / norm;
        if (cos > best) {
          best = cos;
          best_class = id;
        }
      }
      return best;
    };
    int best_seen_class = 0;
    int best_unseen_class = 0;
    out.best_seen_score.push_back(best_over(out.seen_class_ids, best_seen_class));
    out.best_unseen_score.push_back(best_over(out.unseen_class_ids, best_unseen_class));
    out.best_seen_class.push_back(best_seen_class);
    out.best_unseen_class.push_back(best_unseen_class);
    out.labels.push_back(ds.store.labels[idx]);
    out.from_unseen_split.push_back(ds.store.split_tags[idx] == Split::test_unseen);
  }
  return out;
}

std::vector<double> derive_gamma_grid(const GzslScores& scores) {
  std::vector<double> gaps(scores.best_seen_score.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    gaps[i] = scores.best_seen_score[i] - scores.best_unseen_score[i];
  }
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  std::vector<double> grid;
  grid.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    grid.push_back(0.5 * (gaps[i] + gaps[i + 1]));
  }
  grid.push_back(std::numeric_limits<double>::infinity());
  return grid;
}

namespace {

// Seen/unseen per-class accuracies with the bias applied to seen scores.
std::array<double, 2> accuracies_at(const GzslScores& scores, double gamma) {
  const std::size_t n = scores.labels.size();
  std::vector<int> seen_pred, seen_label, unseen_pred, unseen_label;
  for (std::size_t i = 0; i < n; ++i) {
    // best_seen - gamma compared against best_unseen; +-inf sentinels give
    // the all-seen / all-unseen endpoints.
    const double seen_score =
        std::isinf(gamma) ? (gamma > 0 ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity())
                          : scores.best_seen_score[i] - gamma;
    const double unseen_score = scores.best_unseen_score[i];
    int pred;
    if (seen_score > unseen_score) {
      pred = scores.best_seen_class[i];
    } else if (seen_score < unseen_score) {
      pred = scores.best_unseen_class[i];
    } else {
      pred = std::min(scores.best_seen_class[i], scores.best_unseen_class[i]);
    }
    if (scores.from_unseen_split[i]) {
      unseen_pred.push_back(pred);
      unseen_label.push_back(scores.labels[i]);
    } else {
      seen_pred.push_back(pred);
      seen_label.push_back(scores.labels[i]);
    }
  }
  const double s = per_class_accuracy(seen_pred, seen_label, scores.seen_class_ids);
  const double u = per_class_accuracy(unseen_pred, unseen_label, scores.unseen_class_ids);
  return {s, u};
}

}  // namespace

AusucResult ausuc(const GzslScores& scores, std::vector<double> grid) {
  if (grid.size() < 2) throw ConfigError("ausuc: grid needs at least two points");
  std::sort(grid.begin(), grid.end());
  AusucResult result;
  result.curve.reserve(grid.size());
  for (double gamma : grid) result.curve.push_back(accuracies_at(scores, gamma));
  std::sort(result.curve.begin(), result.curve.end());
  result.curve.erase(std::unique(result.curve.begin(), result.curve.end()), result.curve.end());
  for (std::size_t k = 0; k + 1 < result.curve.size(); ++k) {
    const double width = result.curve[k + 1][0] - result.curve[k][0];
    result.area += width * 0.5 * (result.curve[k][1] + result.curve[k + 1][1]);
  }
  return result;
}

AusucResult ausuc(const Matrix& W, const Dataset& ds) {
  const GzslScores scores = compute_gzsl_scores(W, ds);
  return ausuc(scores, derive_gamma_grid(scores));
}

ErrorMatrix split_error_matrix(const Matrix& W, const Dataset& ds,
                               const std::vector<Split>& splits) {
  const Matrix table_norm = normalize_semantics(ds.table);
  const std::size_t d_s = table_norm.cols();
  BatchErrors errors;
  std::vector<double> pred(d_s);
  std::vector<std::size_t> rows;
  for (std::size_t idx = 0; idx < ds.store.instance_count(); ++idx) {
    if (std::find(splits.begin(), splits.end(), ds.store.split_tags[idx]) == splits.end()) {
      continue;
    }
    rows.push_back(idx);
  }
  if (rows.empty()) throw DataError("split_error_matrix: no instances in requested splits");
  errors.residuals_sq = Matrix(rows.size(), d_s);
  errors.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t idx = rows[i];
    const auto v = ds.store.features.row(idx);
    for (std::size_t j = 0; j < d_s; ++j) pred[j] = dot(W.row(j), v);
    const double norm = l2_norm(pred);
    if (norm == 0.0) {
      throw NumericError("split_error_matrix: zero prediction for instance " +
                         std::to_string(idx));
    }
    const auto label = static_cast<std::size_t>(ds.store.labels[idx]);
    for (std::size_t j = 0; j < d_s; ++j) {
      const double diff = pred[j] / norm - table_norm(label, j);
      errors.residuals_sq(i, j) = diff * diff;
    }
    errors.labels.push_back(static_cast<int>(label));
  }
  return accumulate(errors, ds.table.class_count(), ErrorScope::evaluation);
}

MetricsReport evaluate(const Matrix& W, const Dataset& ds) {
  const Matrix table_norm = normalize_semantics(ds.table);
  MetricsReport report;

  // ZSL: unseen candidates only.
  {
    const auto& ids = ds.manifest.unseen_class_ids;
    Matrix candidates(ids.size(), table_norm.cols());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto row = table_norm.row(static_cast<std::size_t>(ids[k]));
      std::copy(row.begin(), row.end(), candidates.row(k).begin());
    }
    const std::vector<bool> flags(ids.size(), false);
    std::vector<int> preds, labels;
    std::vector<double> pred(table_norm.cols());
    for (std::size_t idx : ds.manifest.test_unseen_indices) {
      const auto v = ds.store.features.row(idx);
      for (std::size_t j = 0; j < pred.size(); ++j) pred[j] = dot(W.row(j), v);
      preds.push_back(ids[static_cast<std::size_t>(classify(pred, candidates, flags, 0.0))]);
      labels.push_back(ds.store.labels[idx]);
    }
    report.t1 = per_class_accuracy(preds, labels, ids);
  }

  const GzslScores scores = compute_gzsl_scores(W, ds);
  const auto at_zero = accuracies_at(scores, 0.0);
  report.s = at_zero[0];
  report.u = at_zero[1];
  report.h = harmonic_mean(report.u, report.s);
  report.ausuc = ausuc(scores, derive_gamma_grid(scores)).area;

  const ErrorMatrix test_errors =
      split_error_matrix(W, ds, {Split::test_seen, Split::test_unseen});
  const MatrixStats stats = matrix_stats(test_errors);
  report.err_mean = stats.mean;
  report.err_std = stats.stddev;
  try {
    report.pcc = pearson_correlation(test_errors, table_norm);
  } catch (const NumericError&) {
    report.pcc = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

void save_metrics_json(const MetricsReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["t1"] = report.t1;
  j["u"] = report.u;
  j["s"] = report.s;
  j["h"] = report.h;
  j["ausuc"] = report.ausuc;
  j["pcc"] = report.pcc;
  j["err_mean"] = report.err_mean;
  j["err_std"] = report.err_std;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

void save_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "t1,u,s,h,ausuc,pcc,err_mean,err_std\n";
  out << format_double(report.t1) << "," << format_double(report.u) << ","
      << format_double(report.s) << "," << format_double(report.h) << ","
      << format_double(report.ausuc) << "," << format_double(report.pcc) << ","
      << format_double(report.err_mean) << "," << format_double(report.err_std) << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

void save_curve_csv(const AusucResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "S,U\n";
  for (const auto& point : result.curve) {
    out << format_double(point[0]) << "," << format_double(point[1]) << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace remse
