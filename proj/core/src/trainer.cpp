#include "remse/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "remse/error.hpp"
#include "remse/rebalance.hpp"
#include "remse/rng.hpp"
#include "remse/text.hpp"

namespace remse {

LossKind parse_loss_kind(const std::string& name) {
  if (name == "sce") return LossKind::sce;
  if (name == "sce+nmse") return LossKind::sce_nmse;
  if (name == "sce+remse") return LossKind::sce_remse;
  if (name == "sce+balmse") return LossKind::sce_balmse;
  if (name == "nmse") return LossKind::nmse;
  if (name == "remse") return LossKind::remse;
  throw ConfigError("unknown loss '" + name +
                    "'; expected one of sce, sce+nmse, sce+remse, sce+balmse, nmse, remse");
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::sce: return "sce";
    case LossKind::sce_nmse: return "sce+nmse";
    case LossKind::sce_remse: return "sce+remse";
    case LossKind::sce_balmse: return "sce+balmse";
    case LossKind::nmse: return "nmse";
    case LossKind::remse: return "remse";
  }
  return "?";
}

void TrainConfig::validate() const {
  loss_cfg.validate();
  if (!(alpha >= 0.0)) throw ConfigError("train config: alpha must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("train config: beta must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("train config: eps must be > 0");
  if (ema_mu.has_value() && !(*ema_mu >= 0.0 && *ema_mu < 1.0)) {
    throw ConfigError("train config: ema_mu must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("train config: learning rate must be > 0");
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train config: batch size must be >= 1");
  if (!(init_scale > 0.0)) throw ConfigError("train config: init scale must be > 0");
}

TrainingBatch make_batch(const Dataset& ds, const Matrix& table_norm,
                         const Matrix& table_raw_masked, std::span<const std::size_t> indices,
                         const std::vector<int>& global_to_seen) {
  const std::size_t n = indices.size();
  const std::size_t d_v = ds.store.feature_dim();
  const std::size_t d_s = table_norm.cols();
  TrainingBatch batch;
  batch.features = Matrix(n, d_v);
  batch.targets_raw = Matrix(n, d_s);
  batch.targets_norm = Matrix(n, d_s);
  batch.labels.resize(n);
  batch.seen_rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = indices[i];
    const int label = ds.store.labels[idx];
    const auto src = ds.store.features.row(idx);
    std::copy(src.begin(), src.end(), batch.features.row(i).begin());
    const auto raw = table_raw_masked.row(static_cast<std::size_t>(label));
    std::copy(raw.begin(), raw.end(), batch.targets_raw.row(i).begin());
    const auto norm = table_norm.row(static_cast<std::size_t>(label));
    std::copy(norm.begin(), norm.end(), batch.targets_norm.row(i).begin());
    batch.labels[i] = label;
    batch.seen_rows[i] = global_to_seen[static_cast<std::size_t>(label)];
  }
  return batch;
}

namespace {

bool loss_uses_factors(LossKind kind) {
  return kind == LossKind::sce_remse || kind == LossKind::remse;
}

struct StepResult {
  double loss = 0.0;
  Matrix grad;
};

StepResult evaluate_step(const Matrix& W, const TrainingBatch& batch, const NmseResult& nmse,
                         const Matrix& seen_table_norm, const TrainConfig& cfg,
                         const ReweightFactors& factors) {
  StepResult out;
  const double lambda = cfg.loss_cfg.lambda;
  switch (cfg.loss) {
    case LossKind::sce:
      out.loss = sce_loss(W, batch, seen_table_norm, cfg.loss_cfg.tau);
      out.grad = sce_grad(W, batch, seen_table_norm, cfg.loss_cfg.tau);
      break;
    case LossKind::sce_nmse: {
      out.loss = sce_loss(W, batch, seen_table_norm, cfg.loss_cfg.tau) + lambda * nmse.value;
      out.grad = sce_grad(W, batch, seen_table_norm, cfg.loss_cfg.tau);
      Matrix reg = nmse_grad(W, batch);
      reg *= lambda;
      out.grad += reg;
      break;
    }
    case LossKind::sce_remse: {
      out.loss = sce_loss(W, batch, seen_table_norm, cfg.loss_cfg.tau) +
                 lambda * remse_loss(nmse.errors, factors);
      out.grad = sce_grad(W, batch, seen_table_norm, cfg.loss_cfg.tau);
      Matrix reg = remse_grad(W, batch, factors);
      reg *= lambda;
      out.grad += reg;
      break;
    }
    case LossKind::sce_balmse: {
      out.loss = sce_loss(W, batch, seen_table_norm, cfg.loss_cfg.tau) +
                 lambda * balanced_mse_loss(W, batch, cfg.loss_cfg.sigma);
      out.grad = sce_grad(W, batch, seen_table_norm, cfg.loss_cfg.tau);
      Matrix reg = balanced_mse_grad(W, batch, cfg.loss_cfg.sigma);
      reg *= lambda;
      out.grad += reg;
      break;
    }
    case LossKind::nmse:
      out.loss = nmse.value;
      out.grad = nmse_grad(W, batch);
      break;
    case LossKind::remse:
      out.loss = remse_loss(nmse.errors, factors);
      out.grad = remse_grad(W, batch, factors);
      break;
  }
  return out;
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (ds.manifest.train_indices.empty()) throw DataError("train: dataset has no training split");

  const std::size_t class_count = ds.table.class_count();
  const std::size_t d_s = ds.table.semantic_dim();
  const std::size_t d_v = ds.store.feature_dim();

  const Matrix table_norm = normalize_semantics(ds.table);
  const Matrix table_raw = ds.table.masked();
  Matrix seen_table_norm(ds.manifest.seen_class_ids.size(), d_s);
  std::vector<int> global_to_seen(class_count, -1);
  for (std::size_t k = 0; k < ds.manifest.seen_class_ids.size(); ++k) {
    const auto id = static_cast<std::size_t>(ds.manifest.seen_class_ids[k]);
    const auto row = table_norm.row(id);
    std::copy(row.begin(), row.end(), seen_table_norm.row(k).begin());
    global_to_seen[id] = static_cast<int>(k);
  }

  Rng rng(cfg.seed);
  Matrix W(d_s, d_v);
  const double init_bound = cfg.init_scale / std::sqrt(static_cast<double>(d_v));
  for (std::size_t i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-init_bound, init_bound);

  std::vector<std::size_t> order = ds.manifest.train_indices;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  const bool factors_needed = loss_uses_factors(cfg.loss);
  ReweightFactors factors = ReweightFactors::unit(class_count, d_s);
  std::optional<ErrorMatrix> ema_running;

  TrainResult result;
  result.trace.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    ErrorAccumulator epoch_errors(class_count, d_s);
    double loss_sum = 0.0;
    double grad_norm_sum = 0.0;
    std::size_t batch_count = 0;

    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t len = std::min(batch_size, order.size() - start);
      const TrainingBatch batch =
          make_batch(ds, table_norm, table_raw, {order.data() + start, len}, global_to_seen);

      ++step;
      StepResult sr;
      NmseResult nmse;
      try {
        nmse = nmse_loss(W, batch);
        if (factors_needed) {
          ErrorMatrix batch_matrix = accumulate(nmse.errors, class_count, ErrorScope::batch);
          if (cfg.ema_mu.has_value()) {
            ema_running = ema_running.has_value()
                              ? ema_update(*ema_running, batch_matrix, *cfg.ema_mu)
                              : std::move(batch_matrix);
            factors = compute_factors(*ema_running, cfg.alpha, cfg.beta, cfg.eps);
          } else {
            factors = compute_factors(batch_matrix, cfg.alpha, cfg.beta, cfg.eps);
          }
        }
        sr = evaluate_step(W, batch, nmse, seen_table_norm, cfg, factors);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step) + " (epoch " +
                           std::to_string(epoch) + "): " + e.what());
      }
      if (!std::isfinite(sr.loss)) {
        throw NumericError("training diverged at step " + std::to_string(step) + " (epoch " +
                           std::to_string(epoch) + "): non-finite loss");
      }
      epoch_errors.add(nmse.errors);
      grad_norm_sum += frobenius_norm(sr.grad);
      sr.grad *= cfg.learning_rate;
      W -= sr.grad;
      loss_sum += sr.loss;
      ++batch_count;
    }

    const ErrorMatrix pooled = epoch_errors.finalize(ErrorScope::evaluation);
    const MatrixStats stats = matrix_stats(pooled);
    EpochRecord rec;
    rec.loss = loss_sum / static_cast<double>(batch_count);
    rec.err_mean = stats.mean;
    rec.err_std = stats.stddev;
    try {
      rec.pcc = pearson_correlation(pooled, table_norm);
    } catch (const NumericError&) {
      rec.pcc = std::numeric_limits<double>::quiet_NaN();
    }
    rec.grad_norm = grad_norm_sum / static_cast<double>(batch_count);
    result.trace.epochs.push_back(rec);
  }

  if (!W.all_finite()) throw NumericError("training produced non-finite weights");
  result.model.W = std::move(W);
  return result;
}

void save_trace_csv(const TrainTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "epoch,loss,err_mean,err_std,pcc,grad_norm\n";
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    const EpochRecord& r = trace.epochs[e];
    out << e << "," << format_double(r.loss) << "," << format_double(r.err_mean) << ","
        << format_double(r.err_std) << "," << format_double(r.pcc) << ","
        << format_double(r.grad_norm) << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

namespace {

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["loss"] = loss_kind_name(cfg.loss);
  j["tau"] = cfg.loss_cfg.tau;
  j["lambda"] = cfg.loss_cfg.lambda;
  j["sigma"] = cfg.loss_cfg.sigma;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["eps"] = cfg.eps;
  if (cfg.ema_mu.has_value()) {
    j["ema_mu"] = *cfg.ema_mu;
  } else {
    j["ema_mu"] = nullptr;
  }
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["init_scale"] = cfg.init_scale;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.loss = parse_loss_kind(j.at("loss").get<std::string>());
  cfg.loss_cfg.tau = j.at("tau").get<double>();
  cfg.loss_cfg.lambda = j.at("lambda").get<double>();
  cfg.loss_cfg.sigma = j.at("sigma").get<double>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.beta = j.at("beta").get<double>();
  cfg.eps = j.at("eps").get<double>();
  if (!j.at("ema_mu").is_null()) cfg.ema_mu = j.at("ema_mu").get<double>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.init_scale = j.at("init_scale").get<double>();
  return cfg;
}

}  // namespace

void save_model(const LinearEmbedding& model, const TrainConfig& cfg,
                const std::filesystem::path& path) {
  nlohmann::json j;
  j["semantic_dim"] = model.W.rows();
  j["feature_dim"] = model.W.cols();
  j["weights"] = std::vector<double>(model.W.data(), model.W.data() + model.W.size());
  j["train_config"] = train_config_to_json(cfg);
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("model file " + path.string() + ": " + e.what());
  }
  LoadedModel loaded;
  try {
    const auto d_s = j.at("semantic_dim").get<std::size_t>();
    const auto d_v = j.at("feature_dim").get<std::size_t>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != d_s * d_v) {
      throw DataError("model file: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(d_s) + "x" + std::to_string(d_v));
    }
    loaded.model.W = Matrix(d_s, d_v);
    std::copy(weights.begin(), weights.end(), loaded.model.W.data());
    loaded.config = train_config_from_json(j.at("train_config"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path.string() + ": " + e.what());
  }
  return loaded;
}

TheoremTrajectory demo_theorem_b(double x_pred0, double y_pred0, double x_target,
                                 double y_target, double learning_rate, double alpha,
                                 int steps) {
  if (!(learning_rate > 0.0)) throw ConfigError("theorem demo: learning rate must be > 0");
  if (!(alpha >= 0.0)) throw ConfigError("theorem demo: alpha must be >= 0");
  if (steps < 1) throw ConfigError("theorem demo: steps must be >= 1");
  constexpr double kEps = 1e-12;

  TheoremTrajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(steps) + 1);
  double x_pred = x_pred0;
  double y_pred = y_pred0;

  auto current = [&]() {
    TheoremStep s;
    s.error_x = (x_pred - x_target) * (x_pred - x_target);
    s.error_y = (y_pred - y_target) * (y_pred - y_target);
    const double mx = std::max(s.error_x, kEps);
    const double my = std::max(s.error_y, kEps);
    const double mn = std::min(mx, my);
    s.weight_x = std::pow(std::log(mx / mn) + 1.0, alpha);
    s.weight_y = std::pow(std::log(my / mn) + 1.0, alpha);
    return s;
  };

  for (int t = 0; t < steps; ++t) {
    const TheoremStep s = current();
    traj.steps.push_back(s);
    // (1 - 2 r w)^2 < 1 for both weights, i.e. r * w < 1.
    if (learning_rate * std::max(s.weight_x, s.weight_y) >= 1.0) {
      throw NumericError("theorem demo: step-size condition violated at step " +
                         std::to_string(t) + " (r * weight = " +
                         format_double(learning_rate * std::max(s.weight_x, s.weight_y)) + ")");
    }
    x_pred -= 2.0 * learning_rate * s.weight_x * (x_pred - x_target);
    y_pred -= 2.0 * learning_rate * s.weight_y * (y_pred - y_target);
  }
  traj.steps.push_back(current());
  return traj;
}

DescentReport run_mse_descent(const Matrix& features, const Matrix& targets_raw,
                              double learning_rate, double grad_tol, long max_steps) {
  if (!(learning_rate > 0.0)) throw ConfigError("mse descent: learning rate must be > 0");
  if (!(grad_tol > 0.0)) throw ConfigError("mse descent: gradient tolerance must be > 0");
  if (features.rows() != targets_raw.rows()) {
    throw ShapeError("mse descent: " + std::to_string(features.rows()) + " feature rows vs " +
                     std::to_string(targets_raw.rows()) + " target rows");
  }
  TrainingBatch batch;
  batch.features = features;
  batch.targets_raw = targets_raw;
  batch.targets_norm = targets_raw;  // unused by the plain-MSE path
  batch.labels.assign(features.rows(), 0);
  batch.seen_rows.assign(features.rows(), -1);

  DescentReport report;
  report.W = Matrix(targets_raw.cols(), features.cols());
  for (long t = 0; t <= max_steps; ++t) {
    Matrix grad = mse_grad(report.W, batch);
    report.grad_norm = frobenius_norm(grad);
    if (report.grad_norm < grad_tol) {
      report.steps_taken = t;
      const Matrix pred = predict(report.W, features);
      for (std::size_t i = 0; i < pred.rows(); ++i) {
        DescentSample sample;
        sample.pred_norm = l2_norm(pred.row(i));
        const double target_norm = l2_norm(targets_raw.row(i));
        if (sample.pred_norm == 0.0 || target_norm == 0.0) {
          throw NumericError("mse descent: zero norm at convergence for sample " +
                             std::to_string(i));
        }
        const double cos_theta =
            dot(pred.row(i), targets_raw.row(i)) / (sample.pred_norm * target_norm);
        sample.target_norm_cos = target_norm * cos_theta;
        sample.gap = std::abs(sample.pred_norm - sample.target_norm_cos);
        report.samples.push_back(sample);
      }
      return report;
    }
    grad *= learning_rate;
    report.W -= grad;
  }
  throw NumericError("mse descent: gradient norm " + format_double(report.grad_norm) +
                     " still above tolerance after " + std::to_string(max_steps) + " steps");
}

DescentReport demo_proposition_a() {
  const Matrix features = Matrix::from_rows({{1.0}, {1.0}});
  const Matrix targets = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  return run_mse_descent(features, targets, 0.1, 1e-8, 100000);
}

}  // namespace remse
