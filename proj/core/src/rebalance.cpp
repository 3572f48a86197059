#include "remse/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "remse/error.hpp"
#include "remse/text.hpp"

namespace remse {

double ErrorMatrix::value(std::size_t l, std::size_t j) const {
  if (!present(l, j)) {
    throw NumericError("error matrix: cell (" + std::to_string(l) + "," + std::to_string(j) +
                       ") is absent");
  }
  return mean_(l, j);
}

void ErrorMatrix::set_cell(std::size_t l, std::size_t j, double mean, long count) {
  mean_(l, j) = mean;
  counts_[l * semantics() + j] = count;
}

void ErrorAccumulator::add(const BatchErrors& errors) {
  const Matrix& e = errors.residuals_sq;
  if (e.cols() != sums_.cols()) {
    throw ShapeError("error accumulator: residual dim " + std::to_string(e.cols()) +
                     " != semantic dim " + std::to_string(sums_.cols()));
  }
  for (std::size_t i = 0; i < e.rows(); ++i) {
    const int label = errors.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= sums_.rows()) {
      throw DataError("error accumulator: label out of range: " + std::to_string(label));
    }
    const auto l = static_cast<std::size_t>(label);
    for (std::size_t j = 0; j < e.cols(); ++j) sums_(l, j) += e(i, j);
    counts_[l] += 1;
  }
}

ErrorMatrix ErrorAccumulator::finalize(ErrorScope scope) const {
  ErrorMatrix out(sums_.rows(), sums_.cols(), scope);
  for (std::size_t l = 0; l < sums_.rows(); ++l) {
    if (counts_[l] == 0) continue;
    for (std::size_t j = 0; j < sums_.cols(); ++j) {
      out.set_cell(l, j, sums_(l, j) / static_cast<double>(counts_[l]), counts_[l]);
    }
  }
  return out;
}

ErrorMatrix accumulate(const BatchErrors& errors, std::size_t class_count, ErrorScope scope) {
  ErrorAccumulator acc(class_count, errors.residuals_sq.cols());
  acc.add(errors);
  return acc.finalize(scope);
}

double ReweightFactors::weight(int label, std::size_t j) const {
  if (label < 0 || static_cast<std::size_t>(label) >= classes()) {
    throw DataError("reweight factors: no factor row for label " + std::to_string(label));
  }
  const auto l = static_cast<std::size_t>(label);
  return p(l, j) * q(l, j);
}

ReweightFactors ReweightFactors::unit(std::size_t classes, std::size_t semantics) {
  ReweightFactors f;
  f.p = Matrix(classes, semantics, 1.0);
  f.q = Matrix(classes, semantics, 1.0);
  f.alpha = 0.0;
  f.beta = 0.0;
  return f;
}

ReweightFactors compute_factors(const ErrorMatrix& m, double alpha, double beta, double eps) {
  if (!(alpha >= 0.0)) throw ConfigError("compute_factors: alpha must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("compute_factors: beta must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("compute_factors: eps must be > 0");

  const std::size_t classes = m.classes();
  const std::size_t semantics = m.semantics();
  ReweightFactors f;
  f.p = Matrix(classes, semantics, 1.0);
  f.q = Matrix(classes, semantics, 1.0);
  f.alpha = alpha;
  f.beta = beta;
  f.eps = eps;

  const double absent = std::numeric_limits<double>::infinity();
  std::vector<double> col_min(semantics, absent);
  std::vector<double> row_min(classes, absent);
  for (std::size_t l = 0; l < classes; ++l) {
    for (std::size_t j = 0; j < semantics; ++j) {
      if (!m.present(l, j)) continue;
      const double floored = std::max(m.value(l, j), eps);
      col_min[j] = std::min(col_min[j], floored);
      row_min[l] = std::min(row_min[l], floored);
    }
  }
  for (std::size_t l = 0; l < classes; ++l) {
    for (std::size_t j = 0; j < semantics; ++j) {
      if (!m.present(l, j)) continue;
      const double floored = std::max(m.value(l, j), eps);
      f.p(l, j) = std::pow(std::log(floored / col_min[j]) + 1.0, alpha);
      f.q(l, j) = std::pow(std::log(floored / row_min[l]) + 1.0, beta);
    }
  }
  return f;
}

ErrorMatrix ema_update(const ErrorMatrix& running, const ErrorMatrix& batch, double mu) {
  if (running.classes() != batch.classes() || running.semantics() != batch.semantics()) {
    throw ShapeError("ema_update: shape mismatch " + std::to_string(running.classes()) + "x" +
                     std::to_string(running.semantics()) + " vs " +
                     std::to_string(batch.classes()) + "x" + std::to_string(batch.semantics()));
  }
  if (!(mu >= 0.0 && mu < 1.0)) throw ConfigError("ema_update: mu must be in [0, 1)");
  ErrorMatrix out(running.classes(), running.semantics(), batch.scope());
  for (std::size_t l = 0; l < running.classes(); ++l) {
    for (std::size_t j = 0; j < running.semantics(); ++j) {
      const bool in_old = running.present(l, j);
      const bool in_new = batch.present(l, j);
      if (in_old && in_new) {
        out.set_cell(l, j, mu * running.value(l, j) + (1.0 - mu) * batch.value(l, j),
                     running.count(l, j) + batch.count(l, j));
      } else if (in_old) {
        out.set_cell(l, j, running.value(l, j), running.count(l, j));
      } else if (in_new) {
        out.set_cell(l, j, batch.value(l, j), batch.count(l, j));
      }
    }
  }
  return out;
}

double pearson_correlation(const ErrorMatrix& m, const Matrix& table_norm) {
  if (table_norm.rows() != m.classes() || table_norm.cols() != m.semantics()) {
    throw ShapeError("pearson_correlation: table shape " + shape_string(table_norm) +
                     " != error matrix " + std::to_string(m.classes()) + "x" +
                     std::to_string(m.semantics()));
  }
  std::size_t n = 0;
  double sum_x = 0.0, sum_y = 0.0;
  for (std::size_t l = 0; l < m.classes(); ++l) {
    for (std::size_t j = 0; j < m.semantics(); ++j) {
      if (!m.present(l, j)) continue;
      sum_x += table_norm(l, j);
      sum_y += m.value(l, j);
      ++n;
    }
  }
  if (n < 2) throw NumericError("pearson_correlation: fewer than two present cells");
  const double mean_x = sum_x / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t l = 0; l < m.classes(); ++l) {
    for (std::size_t j = 0; j < m.semantics(); ++j) {
      if (!m.present(l, j)) continue;
      const double dx = table_norm(l, j) - mean_x;
      const double dy = m.value(l, j) - mean_y;
      cov += dx * dy;
      var_x += dx * dx;
      var_y += dy * dy;
    }
  }
  if (var_x == 0.0 || var_y == 0.0) {
    throw NumericError("pearson_correlation: undefined for a constant series");
  }
  return cov / std::sqrt(var_x * var_y);
}

MatrixStats matrix_stats(const ErrorMatrix& m) {
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t l = 0; l < m.classes(); ++l) {
    for (std::size_t j = 0; j < m.semantics(); ++j) {
      if (!m.present(l, j)) continue;
      sum += m.value(l, j);
      ++n;
    }
  }
  if (n == 0) throw NumericError("matrix_stats: empty error matrix");
  MatrixStats stats;
  stats.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t l = 0; l < m.classes(); ++l) {
    for (std::size_t j = 0; j < m.semantics(); ++j) {
      if (!m.present(l, j)) continue;
      const double d = m.value(l, j) - stats.mean;
      sq += d * d;
    }
  }
  stats.stddev = std::sqrt(sq / static_cast<double>(n));
  return stats;
}

namespace {

constexpr double kHeatmapEps = 1e-12;

struct Rgb {
  int r, g, b;
};

// Light gray at the low end through red at the high end; monotone channels.
Rgb heat_color(double t) {
  const double clamped = std::clamp(t, 0.0, 1.0);
  return {static_cast<int>(std::lround(230.0 - 26.0 * clamped)),
          static_cast<int>(std::lround(230.0 * (1.0 - clamped))),
          static_cast<int>(std::lround(230.0 * (1.0 - clamped)))};
}

}  // namespace

void export_heatmap(const ErrorMatrix& m, const std::vector<std::string>& semantic_names,
                    const std::filesystem::path& base_path) {
  if (semantic_names.size() != m.semantics()) {
    throw DataError("export_heatmap: " + std::to_string(semantic_names.size()) +
                    " semantic names for " + std::to_string(m.semantics()) + " semantics");
  }
  bool any_present = false;
  double log_min = 0.0, log_max = 0.0;
  for (std::size_t l = 0; l < m.classes(); ++l) {
    for (std::size_t j = 0; j < m.semantics(); ++j) {
      if (!m.present(l, j)) continue;
      const double v = std::log(m.value(l, j) + kHeatmapEps);
      if (!any_present) {
        log_min = log_max = v;
        any_present = true;
      } else {
        log_min = std::min(log_min, v);
        log_max = std::max(log_max, v);
      }
    }
  }
  if (!any_present) throw NumericError("export_heatmap: empty error matrix");

  {
    std::ofstream csv(base_path.string() + ".csv");
    if (!csv) throw DataError("cannot open for writing: " + base_path.string() + ".csv");
    csv << "class_id";
    for (const auto& name : semantic_names) csv << "," << name;
    csv << "\n";
    for (std::size_t l = 0; l < m.classes(); ++l) {
      csv << l;
      for (std::size_t j = 0; j < m.semantics(); ++j) {
        csv << ",";
        if (m.present(l, j)) csv << format_double(std::log(m.value(l, j) + kHeatmapEps));
      }
      csv << "\n";
    }
    if (!csv) throw DataError("write failed: " + base_path.string() + ".csv");
  }

  {
    constexpr int kCell = 12;
    const auto width = static_cast<long>(m.semantics()) * kCell;
    const auto height = static_cast<long>(m.classes()) * kCell;
    std::ofstream svg(base_path.string() + ".svg");
    if (!svg) throw DataError("cannot open for writing: " + base_path.string() + ".svg");
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    const double span = log_max - log_min;
    for (std::size_t l = 0; l < m.classes(); ++l) {
      for (std::size_t j = 0; j < m.semantics(); ++j) {
        Rgb color{255, 255, 255};
        if (m.present(l, j)) {
          const double v = std::log(m.value(l, j) + kHeatmapEps);
          color = heat_color(span > 0.0 ? (v - log_min) / span : 0.0);
        }
        svg << "<rect x=\"" << j * kCell << "\" y=\"" << l * kCell << "\" width=\"" << kCell
            << "\" height=\"" << kCell << "\" fill=\"rgb(" << color.r << "," << color.g << ","
            << color.b << ")\"/>\n";
      }
    }
    svg << "</svg>\n";
    if (!svg) throw DataError("write failed: " + base_path.string() + ".svg");
  }
}

}  // namespace remse
