// Command-line runner: synthetic data, training, evaluation, diagnostics,
// and the two closed-form descent demos. Every subcommand writes its
// resolved configuration next to its outputs so a run can be reproduced
// from the artifacts alone.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "remse/dataset.hpp"
#include "remse/error.hpp"
#include "remse/eval.hpp"
#include "remse/rebalance.hpp"
#include "remse/rng.hpp"
#include "remse/synthetic.hpp"
#include "remse/text.hpp"
#include "remse/trainer.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void write_run_config(const fs::path& out_dir, const nlohmann::json& config) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "run_config.json");
  if (!out) throw remse::DataError("cannot write " + (out_dir / "run_config.json").string());
  out << config.dump(2) << "\n";
}

nlohmann::json train_flags_json(const remse::TrainConfig& cfg, const std::string& data_dir) {
  nlohmann::json j;
  j["data"] = data_dir;
  j["loss"] = remse::loss_kind_name(cfg.loss);
  j["tau"] = cfg.loss_cfg.tau;
  j["lambda"] = cfg.loss_cfg.lambda;
  j["sigma"] = cfg.loss_cfg.sigma;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["eps"] = cfg.eps;
  j["ema_mu"] = cfg.ema_mu.has_value() ? nlohmann::json(*cfg.ema_mu) : nlohmann::json(nullptr);
  j["lr"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["batch"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["init_scale"] = cfg.init_scale;
  return j;
}

struct SynthArgs {
  remse::SynthConfig cfg;
  std::uint64_t seed = 7;
  std::string out_dir;
};

struct TrainArgs {
  remse::TrainConfig cfg;
  std::string loss_name = "sce+remse";
  double ema_mu = -1.0;  // negative means off
  std::string data_dir;
  std::string out_dir = ".";
};

struct EvalArgs {
  std::string data_dir, model_path;
  std::string out_dir = ".";
};

struct DiagnoseArgs {
  std::string data_dir, model_path;
  std::string split = "test";
  std::string out_dir = ".";
};

struct DemoArgs {
  std::string which;
  double x0 = 1.0, y0 = 2.0, target_x = 0.0, target_y = 0.0;
  double lr = 0.01, alpha = 1.0;
  int steps = 100000;
  std::string out_dir = ".";
};

int run_synth(const SynthArgs& args) {
  remse::Rng rng(args.seed);
  const remse::Dataset ds = remse::generate_synthetic(args.cfg, rng);
  remse::save_dataset(ds, args.out_dir);

  nlohmann::json j;
  j["classes"] = args.cfg.classes;
  j["seen"] = args.cfg.seen;
  j["ds"] = args.cfg.semantic_dim;
  j["dv"] = args.cfg.feature_dim;
  j["n_per_class"] = args.cfg.per_class;
  j["noise"] = args.cfg.noise;
  j["gamma"] = args.cfg.gamma;
  j["range_lo"] = args.cfg.range_lo;
  j["range_hi"] = args.cfg.range_hi;
  j["train_fraction"] = args.cfg.train_fraction;
  j["seed"] = args.seed;
  write_run_config(args.out_dir, j);
  std::cout << "wrote dataset: " << args.out_dir << " (" << ds.store.instance_count()
            << " instances, " << ds.table.class_count() << " classes)\n";
  return 0;
}

int run_train(TrainArgs& args) {
  args.cfg.loss = remse::parse_loss_kind(args.loss_name);
  if (args.ema_mu >= 0.0) args.cfg.ema_mu = args.ema_mu;
  const remse::Dataset ds = remse::load_dataset(args.data_dir);
  const remse::TrainResult result = remse::train(ds, args.cfg);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  remse::save_model(result.model, args.cfg, out_dir / "model.json");
  remse::save_trace_csv(result.trace, out_dir / "trace.csv");
  write_run_config(out_dir, train_flags_json(args.cfg, args.data_dir));
  const auto& last = result.trace.epochs.back();
  std::cout << "trained " << args.cfg.epochs << " epochs; final loss "
            << remse::format_double(last.loss) << ", error mean "
            << remse::format_double(last.err_mean) << ", error std "
            << remse::format_double(last.err_std) << "\n";
  return 0;
}

int run_eval(const EvalArgs& args) {
  const remse::Dataset ds = remse::load_dataset(args.data_dir);
  const remse::LoadedModel loaded = remse::load_model(args.model_path);
  const remse::MetricsReport report = remse::evaluate(loaded.model.W, ds);
  const remse::AusucResult curve = remse::ausuc(loaded.model.W, ds);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  remse::save_metrics_json(report, out_dir / "metrics.json");
  remse::save_metrics_csv(report, out_dir / "metrics.csv");
  remse::save_curve_csv(curve, out_dir / "ausuc_curve.csv");
  nlohmann::json j;
  j["data"] = args.data_dir;
  j["model"] = args.model_path;
  write_run_config(out_dir, j);
  std::cout << "T1 " << remse::format_double(report.t1) << "  U " << remse::format_double(report.u)
            << "  S " << remse::format_double(report.s) << "  H " << remse::format_double(report.h)
            << "  AUSUC " << remse::format_double(report.ausuc) << "\n";
  return 0;
}

int run_diagnose(const DiagnoseArgs& args) {
  const remse::Dataset ds = remse::load_dataset(args.data_dir);
  const remse::LoadedModel loaded = remse::load_model(args.model_path);

  std::vector<remse::Split> splits;
  if (args.split == "train") {
    splits = {remse::Split::train};
  } else if (args.split == "test_seen") {
    splits = {remse::Split::test_seen};
  } else if (args.split == "test_unseen") {
    splits = {remse::Split::test_unseen};
  } else if (args.split == "test") {
    splits = {remse::Split::test_seen, remse::Split::test_unseen};
  } else {
    throw remse::ConfigError("unknown split '" + args.split +
                             "'; expected train, test_seen, test_unseen, or test");
  }

  const remse::ErrorMatrix errors = remse::split_error_matrix(loaded.model.W, ds, splits);
  const remse::MatrixStats stats = remse::matrix_stats(errors);
  double pcc = std::numeric_limits<double>::quiet_NaN();
  try {
    pcc = remse::pearson_correlation(errors, remse::normalize_semantics(ds.table));
  } catch (const remse::NumericError&) {
  }

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  remse::export_heatmap(errors, ds.table.semantic_names, out_dir / "heatmap");
  {
    std::ofstream out(out_dir / "diagnostics.csv");
    if (!out) throw remse::DataError("cannot write diagnostics.csv");
    out << "split,pcc,err_mean,err_std\n";
    out << args.split << "," << remse::format_double(pcc) << ","
        << remse::format_double(stats.mean) << "," << remse::format_double(stats.stddev) << "\n";
  }
  nlohmann::json j;
  j["data"] = args.data_dir;
  j["model"] = args.model_path;
  j["split"] = args.split;
  write_run_config(out_dir, j);
  std::cout << "split " << args.split << ": PCC " << remse::format_double(pcc) << ", error mean "
            << remse::format_double(stats.mean) << ", error std "
            << remse::format_double(stats.stddev) << "\n";
  return 0;
}

int run_demo(const DemoArgs& args) {
  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  if (args.which == "theorem-b") {
    const remse::TheoremTrajectory traj = remse::demo_theorem_b(
        args.x0, args.y0, args.target_x, args.target_y, args.lr, args.alpha, args.steps);
    std::ofstream out(out_dir / "theorem_b.csv");
    if (!out) throw remse::DataError("cannot write theorem_b.csv");
    out << "step,error_x,error_y,weight_x,weight_y\n";
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const auto& s = traj.steps[t];
      out << t << "," << remse::format_double(s.error_x) << ","
          << remse::format_double(s.error_y) << "," << remse::format_double(s.weight_x) << ","
          << remse::format_double(s.weight_y) << "\n";
    }
    const auto& last = traj.steps.back();
    std::cout << "final errors: " << remse::format_double(last.error_x) << ", "
              << remse::format_double(last.error_y) << "\n";
  } else {
    const remse::DescentReport report = remse::demo_proposition_a();
    std::ofstream out(out_dir / "prop_a.csv");
    if (!out) throw remse::DataError("cannot write prop_a.csv");
    out << "sample,pred_norm,target_norm_cos,gap\n";
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
      const auto& s = report.samples[i];
      out << i << "," << remse::format_double(s.pred_norm) << ","
          << remse::format_double(s.target_norm_cos) << "," << remse::format_double(s.gap)
          << "\n";
    }
    std::cout << "converged in " << report.steps_taken << " steps; max gap "
              << remse::format_double([&] {
                   double g = 0.0;
                   for (const auto& s : report.samples) g = std::max(g, s.gap);
                   return g;
                 }())
              << "\n";
  }
  nlohmann::json j;
  j["demo"] = args.which;
  if (args.which == "theorem-b") {
    j["x0"] = args.x0;
    j["y0"] = args.y0;
    j["target_x"] = args.target_x;
    j["target_y"] = args.target_y;
    j["lr"] = args.lr;
    j["alpha"] = args.alpha;
    j["steps"] = args.steps;
  }
  write_run_config(out_dir, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rebalanced semantic-embedding regression at desk scale"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  synth_cmd->add_option("--classes", synth.cfg.classes, "Total class count")->capture_default_str();
  synth_cmd->add_option("--seen", synth.cfg.seen, "Seen class count")->capture_default_str();
  synth_cmd->add_option("--ds", synth.cfg.semantic_dim, "Semantic dimension")->capture_default_str();
  synth_cmd->add_option("--dv", synth.cfg.feature_dim, "Feature dimension")->capture_default_str();
  synth_cmd->add_option("--n-per-class", synth.cfg.per_class, "Instances per class")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.cfg.noise, "Base noise scale")->capture_default_str();
  synth_cmd->add_option("--gamma", synth.cfg.gamma, "Heteroscedasticity exponent")
      ->capture_default_str();
  synth_cmd->add_option("--range-lo", synth.cfg.range_lo, "Semantic range low end")
      ->capture_default_str();
  synth_cmd->add_option("--range-hi", synth.cfg.range_hi, "Semantic range high end")
      ->capture_default_str();
  synth_cmd->add_option("--train-fraction", synth.cfg.train_fraction,
                        "Training fraction per seen class")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir, "Output dataset directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a linear embedding");
  train_cmd->add_option("--data", train_args.data_dir, "Dataset directory")->required();
  train_cmd->add_option("--loss", train_args.loss_name,
                        "sce, sce+nmse, sce+remse, sce+balmse, nmse, remse")
      ->capture_default_str();
  train_cmd->add_option("--alpha", train_args.cfg.alpha, "Class-level factor exponent")
      ->capture_default_str();
  train_cmd->add_option("--beta", train_args.cfg.beta, "Semantic-level factor exponent")
      ->capture_default_str();
  train_cmd->add_option("--lambda", train_args.cfg.loss_cfg.lambda, "Regression term weight")
      ->capture_default_str();
  train_cmd->add_option("--tau", train_args.cfg.loss_cfg.tau, "Cosine logit scale")
      ->capture_default_str();
  train_cmd->add_option("--sigma", train_args.cfg.loss_cfg.sigma,
                        "Balanced baseline temperature")
      ->capture_default_str();
  train_cmd->add_option("--eps", train_args.cfg.eps, "Factor ratio floor")->capture_default_str();
  train_cmd->add_option("--ema-mu", train_args.ema_mu,
                        "Error-matrix EMA coefficient in [0,1); negative disables")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.cfg.learning_rate, "Learning rate")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_args.cfg.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch", train_args.cfg.batch_size, "Batch size")->capture_default_str();
  train_cmd->add_option("--seed", train_args.cfg.seed, "Run seed")->capture_default_str();
  train_cmd->add_option("--init-scale", train_args.cfg.init_scale, "Weight init scale")
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out_dir, "Output directory")->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model");
  eval_cmd->add_option("--data", eval_args.data_dir, "Dataset directory")->required();
  eval_cmd->add_option("--model", eval_args.model_path, "Model file")->required();
  eval_cmd->add_option("--out", eval_args.out_dir, "Output directory")->capture_default_str();

  DiagnoseArgs diag_args;
  auto* diag_cmd = app.add_subcommand("diagnose", "Error-matrix diagnostics and heatmap");
  diag_cmd->add_option("--data", diag_args.data_dir, "Dataset directory")->required();
  diag_cmd->add_option("--model", diag_args.model_path, "Model file")->required();
  diag_cmd->add_option("--split", diag_args.split, "train, test_seen, test_unseen, or test")
      ->capture_default_str();
  diag_cmd->add_option("--out", diag_args.out_dir, "Output directory")->capture_default_str();

  DemoArgs demo_args;
  auto* demo_cmd = app.add_subcommand("demo", "Closed-form descent demonstrations");
  demo_cmd->add_option("which", demo_args.which, "theorem-b or prop-a")
      ->required()
      ->check(CLI::IsMember({"theorem-b", "prop-a"}));
  demo_cmd->add_option("--x0", demo_args.x0, "Initial prediction for sample x")
      ->capture_default_str();
  demo_cmd->add_option("--y0", demo_args.y0, "Initial prediction for sample y")
      ->capture_default_str();
  demo_cmd->add_option("--target-x", demo_args.target_x, "Target for sample x")
      ->capture_default_str();
  demo_cmd->add_option("--target-y", demo_args.target_y, "Target for sample y")
      ->capture_default_str();
  demo_cmd->add_option("--lr", demo_args.lr, "Step size")->capture_default_str();
  demo_cmd->add_option("--alpha", demo_args.alpha, "Factor exponent")->capture_default_str();
  demo_cmd->add_option("--steps", demo_args.steps, "Step count")->capture_default_str();
  demo_cmd->add_option("--out", demo_args.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (train_cmd->parsed()) return run_train(train_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (diag_cmd->parsed()) return run_diagnose(diag_args);
    if (demo_cmd->parsed()) return run_demo(demo_args);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const remse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const remse::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const remse::ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const remse::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
