#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "remse/error.hpp"
#include "remse/grad_check.hpp"
#include "remse/losses.hpp"
#include "remse/matrix.hpp"
#include "remse/rebalance.hpp"
#include "remse/rng.hpp"
#include "test_util.hpp"

using namespace remse;
using remse::testing::random_matrix;

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kFdTol = 1e-4;

Matrix normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double norm = l2_norm(out.row(r));
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) /= norm;
  }
  return out;
}

struct Fixture {
  Matrix W;
  Matrix seen_table_norm;
  TrainingBatch batch;
};

// Random instance: class table with positive entries, labels drawn from the
// seen set, targets copied from the table.
Fixture random_fixture(Rng& rng, std::size_t n, std::size_t d_s, std::size_t d_v,
                       std::size_t seen_classes) {
  Fixture fx;
  fx.W = random_matrix(rng, d_s, d_v, -0.5, 0.5);
  const Matrix table_raw = random_matrix(rng, seen_classes, d_s, 0.2, 2.0);
  fx.seen_table_norm = normalize_rows(table_raw);
  fx.batch.features = random_matrix(rng, n, d_v, -1.0, 1.0);
  fx.batch.targets_raw = Matrix(n, d_s);
  fx.batch.targets_norm = Matrix(n, d_s);
  fx.batch.labels.resize(n);
  fx.batch.seen_rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<int>(rng.next_below(seen_classes));
    fx.batch.labels[i] = label;
    fx.batch.seen_rows[i] = label;
    const auto raw = table_raw.row(static_cast<std::size_t>(label));
    std::copy(raw.begin(), raw.end(), fx.batch.targets_raw.row(i).begin());
    const auto norm = fx.seen_table_norm.row(static_cast<std::size_t>(label));
    std::copy(norm.begin(), norm.end(), fx.batch.targets_norm.row(i).begin());
  }
  return fx;
}

double per_sample_nmse(const NmseResult& r, std::size_t i) {
  double acc = 0.0;
  for (std::size_t j = 0; j < r.errors.residuals_sq.cols(); ++j) {
    acc += r.errors.residuals_sq(i, j);
  }
  return acc;
}

}  // namespace

TEST(Predict, IdentityWeightsPassFeaturesThrough) {
  Rng rng(1);
  const Matrix features = random_matrix(rng, 4, 3);
  const Matrix out = predict(Matrix::identity(3), features);
  EXPECT_EQ(out, features);
}

TEST(Predict, ZeroWeightsGiveZeroPredictions) {
  Rng rng(2);
  const Matrix features = random_matrix(rng, 4, 3);
  const Matrix out = predict(Matrix(2, 3), features);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out.data()[i], 0.0);
}

TEST(Predict, HandComputedRow) {
  const Matrix W = Matrix::from_rows({{1.0, 1.0}});
  const Matrix features = Matrix::from_rows({{2.0, 3.0}});
  const Matrix out = predict(W, features);
  EXPECT_DOUBLE_EQ(out(0, 0), 5.0);
}

TEST(ClassProbabilities, EqualCosinesSplitEvenly) {
  // Both classes at the same angle from the prediction.
  const Matrix table = normalize_rows(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  const std::vector<double> pred{1.0, 1.0};
  const auto probs = class_probabilities(pred, table, 5.0);
  EXPECT_NEAR(probs[0], 0.5, 1e-12);
  EXPECT_NEAR(probs[1], 0.5, 1e-12);
}

TEST(ClassProbabilities, ZeroTauCollapsesToUniform) {
  const Matrix table = normalize_rows(Matrix::from_rows({{1.0, 0.0}, {0.5, 1.0}, {0.2, 0.1}}));
  const std::vector<double> pred{0.3, 0.9};
  const auto probs = class_probabilities(pred, table, 0.0);
  for (double p : probs) EXPECT_NEAR(p, 1.0 / 3.0, 1e-12);
}

TEST(ClassProbabilities, AlignedVersusOrthogonal) {
  const Matrix table = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const std::vector<double> pred{2.0, 0.0};  // cos 1 with class 0, cos 0 with class 1
  const auto probs = class_probabilities(pred, table, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(probs[0], e / (e + 1.0), 1e-12);
  EXPECT_NEAR(probs[1], 1.0 / (e + 1.0), 1e-12);
  EXPECT_NEAR(probs[0], 0.7311, 1e-4);
  EXPECT_NEAR(probs[1], 0.2689, 1e-4);
}

TEST(ClassProbabilities, SumToOneAndPositive) {
  Rng rng(3);
  const Matrix table = normalize_rows(random_matrix(rng, 7, 5, 0.1, 1.0));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pred(5);
    for (double& x : pred) x = rng.uniform(-2.0, 2.0);
    if (l2_norm(pred) == 0.0) continue;
    const auto probs = class_probabilities(pred, table, 20.0);
    double sum = 0.0;
    for (double p : probs) {
      EXPECT_GT(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ClassProbabilities, ScaleInvariantInPrediction) {
  Rng rng(4);
  const Matrix table = normalize_rows(random_matrix(rng, 4, 6, 0.1, 1.0));
  std::vector<double> pred(6);
  for (double& x : pred) x = rng.uniform(-1.0, 1.0);
  const auto base = class_probabilities(pred, table, 13.0);
  for (double c : {0.01, 3.0, 250.0}) {
    std::vector<double> scaled = pred;
    for (double& x : scaled) x *= c;
    const auto probs = class_probabilities(scaled, table, 13.0);
    for (std::size_t k = 0; k < probs.size(); ++k) EXPECT_NEAR(probs[k], base[k], 1e-12);
  }
}

TEST(ClassProbabilities, ZeroPredictionRejected) {
  const Matrix table = Matrix::identity(2);
  const std::vector<double> pred{0.0, 0.0};
  EXPECT_THROW(class_probabilities(pred, table, 1.0), NumericError);
}

TEST(SceLoss, EqualCosinesGiveLogTwo) {
  Rng rng(5);
  Fixture fx = random_fixture(rng, 1, 2, 3, 2);
  fx.seen_table_norm = normalize_rows(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  fx.W = Matrix::from_rows({{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});  // prediction [c, c]
  fx.batch.features = Matrix::from_rows({{1.0, 0.0, 0.0}});
  fx.batch.labels = {0};
  fx.batch.seen_rows = {0};
  EXPECT_NEAR(sce_loss(fx.W, fx.batch, fx.seen_table_norm, 7.0), std::log(2.0), 1e-12);
}

TEST(SceLoss, CorrectClassDominatesAndTightensWithTau) {
  // Prediction equals its class vector; the other class sits at cos < 1.
  const Matrix table = normalize_rows(Matrix::from_rows({{1.0, 0.0}, {1.0, 1.0}}));
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0}});
  batch.targets_raw = Matrix::from_rows({{1.0, 0.0}});
  batch.targets_norm = Matrix::from_rows({{1.0, 0.0}});
  batch.labels = {0};
  batch.seen_rows = {0};
  const Matrix W = Matrix::from_rows({{1.0}, {0.0}});  // prediction = [1, 0] = class 0
  const double loss_small_tau = sce_loss(W, batch, table, 2.0);
  const double loss_large_tau = sce_loss(W, batch, table, 8.0);
  EXPECT_LT(loss_small_tau, std::log(2.0));
  EXPECT_LT(loss_large_tau, loss_small_tau);
}

TEST(SceLoss, LabelOutsideSeenSetRejected) {
  Rng rng(6);
  Fixture fx = random_fixture(rng, 2, 3, 4, 3);
  fx.batch.seen_rows[1] = -1;
  EXPECT_THROW(sce_loss(fx.W, fx.batch, fx.seen_table_norm, 5.0), DataError);
  EXPECT_THROW(sce_grad(fx.W, fx.batch, fx.seen_table_norm, 5.0), DataError);
}

TEST(SceGrad, MatchesFiniteDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 5, 5, 8, 4);
    const double tau = 2.0 + rng.uniform01() * 18.0;
    const Matrix analytic = sce_grad(fx.W, fx.batch, fx.seen_table_norm, tau);
    const Matrix numeric = finite_difference_grad(
        [&](const Matrix& w) { return sce_loss(w, fx.batch, fx.seen_table_norm, tau); }, fx.W,
        kFdStep);
    EXPECT_LT(max_relative_error(analytic, numeric), kFdTol);
  }
}

TEST(MseLoss, PerfectPredictionIsZero) {
  TrainingBatch batch;
  batch.features = Matrix::identity(2);
  batch.targets_raw = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  batch.targets_norm = normalize_rows(batch.targets_raw);
  batch.labels = {0, 1};
  batch.seen_rows = {0, 1};
  const Matrix W = Matrix::from_rows({{1.0, 3.0}, {2.0, 4.0}});  // W e_i = target row i
  EXPECT_DOUBLE_EQ(mse_loss(W, batch), 0.0);
}

TEST(MseLoss, PythagoreanResidual) {
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0}});
  batch.targets_raw = Matrix::from_rows({{3.0, 4.0}});
  batch.targets_norm = normalize_rows(batch.targets_raw);
  batch.labels = {0};
  batch.seen_rows = {0};
  const Matrix W(2, 1);  // prediction [0, 0]
  EXPECT_DOUBLE_EQ(mse_loss(W, batch), 25.0);
}

TEST(MseGrad, MatchesFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 4, 3, 6, 3);
    const Matrix analytic = mse_grad(fx.W, fx.batch);
    const Matrix numeric = finite_difference_grad(
        [&](const Matrix& w) { return mse_loss(w, fx.batch); }, fx.W, kFdStep);
    EXPECT_LT(max_relative_error(analytic, numeric), kFdTol);
  }
}

TEST(NmseLoss, PerfectDirectionIsZero) {
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{2.0}});  // prediction = 2 * target direction
  batch.targets_raw = Matrix::from_rows({{1.0, 0.0}});
  batch.targets_norm = Matrix::from_rows({{1.0, 0.0}});
  batch.labels = {0};
  batch.seen_rows = {0};
  const Matrix W = Matrix::from_rows({{1.0}, {0.0}});
  EXPECT_NEAR(nmse_loss(W, batch).value, 0.0, 1e-15);
}

TEST(NmseLoss, OrthogonalUnitVectorsGiveTwo) {
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0}});
  batch.targets_raw = Matrix::from_rows({{0.0, 1.0}});
  batch.targets_norm = Matrix::from_rows({{0.0, 1.0}});
  batch.labels = {0};
  batch.seen_rows = {0};
  const Matrix W = Matrix::from_rows({{1.0}, {0.0}});  // prediction [1, 0]
  EXPECT_NEAR(nmse_loss(W, batch).value, 2.0, 1e-15);
}

TEST(NmseLoss, AntiparallelGivesFour) {
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0}});
  batch.targets_raw = Matrix::from_rows({{-1.0, 0.0}});
  batch.targets_norm = Matrix::from_rows({{-1.0, 0.0}});
  batch.labels = {0};
  batch.seen_rows = {0};
  const Matrix W = Matrix::from_rows({{1.0}, {0.0}});
  EXPECT_NEAR(nmse_loss(W, batch).value, 4.0, 1e-15);
}

TEST(NmseLoss, CosineIdentityOnRandomPairs) {
  Rng rng(9);
  int checked = 0;
  while (checked < 200) {
    const Fixture fx = random_fixture(rng, 4, 6, 6, 5);
    const NmseResult r = nmse_loss(fx.W, fx.batch);
    const Matrix pred = predict(fx.W, fx.batch.features);
    for (std::size_t i = 0; i < fx.batch.size() && checked < 200; ++i, ++checked) {
      const double norm = l2_norm(pred.row(i));
      ASSERT_GT(norm, 0.0);
      const double cos_theta =
          dot(pred.row(i), fx.batch.targets_norm.row(i)) / norm;
      EXPECT_NEAR(per_sample_nmse(r, i), 2.0 - 2.0 * cos_theta, 1e-12);
    }
  }
}

TEST(NmseLoss, ZeroNormPredictionRejected) {
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0}});
  batch.targets_raw = Matrix::from_rows({{1.0, 0.0}});
  batch.targets_norm = Matrix::from_rows({{1.0, 0.0}});
  batch.labels = {0};
  batch.seen_rows = {0};
  const Matrix W(2, 1);  // prediction [0, 0]
  EXPECT_THROW(nmse_loss(W, batch), NumericError);
}

TEST(NmseGrad, MatchesFiniteDifferences) {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 4, 5, 7, 4);
    const Matrix analytic = nmse_grad(fx.W, fx.batch);
    const Matrix numeric = finite_difference_grad(
        [&](const Matrix& w) { return nmse_loss(w, fx.batch).value; }, fx.W, kFdStep);
    EXPECT_LT(max_relative_error(analytic, numeric), kFdTol);
  }
}

namespace {

// Direct evaluation of the batch-softmax baseline from normalized
// predictions and labels; independent of the production path.
double balanced_mse_oracle(const Matrix& pred_norm, const Matrix& targets_norm, double sigma) {
  const std::size_t n = pred_norm.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t other = 0; other < n; ++other) {
      double dist_sq = 0.0;
      for (std::size_t j = 0; j < pred_norm.cols(); ++j) {
        const double d = pred_norm(i, j) - targets_norm(other, j);
        dist_sq += d * d;
      }
      denom += std::exp(-dist_sq / sigma);
    }
    double own = 0.0;
    for (std::size_t j = 0; j < pred_norm.cols(); ++j) {
      const double d = pred_norm(i, j) - targets_norm(i, j);
      own += d * d;
    }
    acc += -std::log(std::exp(-own / sigma) / denom);
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST(BalancedMse, ExactPredictionOfDistinctLabel) {
  // Prediction equals the first label exactly; second label at distance d.
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  batch.targets_norm = normalize_rows(Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  batch.targets_raw = batch.targets_norm;
  batch.labels = {0, 1};
  batch.seen_rows = {0, 1};
  const Matrix W = Matrix::identity(2);  // predictions equal the labels
  const double d_sq = 2.0;               // squared distance between the two unit axes
  const double expected_per_sample = std::log(1.0 + std::exp(-d_sq));
  EXPECT_NEAR(balanced_mse_loss(W, batch, 1.0), expected_per_sample, 1e-12);
}

TEST(BalancedMse, IdenticalLabelsGiveLogBatchSize) {
  // All labels equal: every denominator term matches the numerator, so each
  // sample contributes exactly log(batch size).
  TrainingBatch batch;
  batch.features = Matrix::from_rows({{1.0, 0.2}, {0.4, 1.0}, {-0.3, 0.6}});
  batch.targets_norm = Matrix(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    batch.targets_norm(i, 0) = 1.0;
    batch.targets_norm(i, 1) = 0.0;
  }
  batch.targets_raw = batch.targets_norm;
  batch.labels = {0, 0, 0};
  batch.seen_rows = {0, 0, 0};
  Rng rng(11);
  const Matrix W = random_matrix(rng, 2, 2, -1.0, 1.0);
  EXPECT_NEAR(balanced_mse_loss(W, batch, 1.0), std::log(3.0), 1e-12);
}

TEST(BalancedMse, LargeSigmaLimitIsLogBatchSize) {
  Rng rng(12);
  const Fixture fx = random_fixture(rng, 6, 4, 5, 4);
  EXPECT_NEAR(balanced_mse_loss(fx.W, fx.batch, 1e9), std::log(6.0), 1e-6);
}

TEST(BalancedMse, MatchesDirectEvaluation) {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 5, 4, 6, 4);
    const Matrix pred_norm = normalize_rows(predict(fx.W, fx.batch.features));
    EXPECT_NEAR(balanced_mse_loss(fx.W, fx.batch, 0.7),
                balanced_mse_oracle(pred_norm, fx.batch.targets_norm, 0.7), 1e-12);
  }
}

TEST(BalancedMseGrad, MatchesFiniteDifferences) {
  Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 4, 4, 6, 3);
    const double sigma = 0.5 + rng.uniform01();
    const Matrix analytic = balanced_mse_grad(fx.W, fx.batch, sigma);
    const Matrix numeric = finite_difference_grad(
        [&](const Matrix& w) { return balanced_mse_loss(w, fx.batch, sigma); }, fx.W, kFdStep);
    EXPECT_LT(max_relative_error(analytic, numeric), kFdTol);
  }
}

TEST(Remse, UnitFactorsReproduceNmseBitForBit) {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Fixture fx = random_fixture(rng, 6, 5, 7, 4);
    const NmseResult nmse = nmse_loss(fx.W, fx.batch);
    const ReweightFactors unit = ReweightFactors::unit(4, 5);
    EXPECT_EQ(remse_loss(nmse.errors, unit), nmse.value);
    EXPECT_EQ(remse_grad(fx.W, fx.batch, unit), nmse_grad(fx.W, fx.batch));
  }
}

TEST(Remse, DoublingWeightsDoublesLoss) {
  Rng rng(16);
  const Fixture fx = random_fixture(rng, 5, 4, 6, 3);
  const NmseResult nmse = nmse_loss(fx.W, fx.batch);
  ReweightFactors factors = ReweightFactors::unit(3, 4);
  Rng jitter(17);
  for (std::size_t i = 0; i < factors.p.size(); ++i) {
    factors.p.data()[i] = 1.0 + jitter.uniform01();
    factors.q.data()[i] = 1.0 + jitter.uniform01();
  }
  const double base = remse_loss(nmse.errors, factors);
  ReweightFactors doubled = factors;
  doubled.p *= 2.0;
  EXPECT_DOUBLE_EQ(remse_loss(nmse.errors, doubled), 2.0 * base);
}

TEST(Remse, MissingFactorRowRejected) {
  Rng rng(18);
  const Fixture fx = random_fixture(rng, 3, 4, 5, 3);
  const NmseResult nmse = nmse_loss(fx.W, fx.batch);
  const ReweightFactors narrow = ReweightFactors::unit(1, 4);  // labels can reach 2
  bool any_label_above = false;
  for (int label : fx.batch.labels) any_label_above |= label >= 1;
  ASSERT_TRUE(any_label_above);
  EXPECT_THROW(remse_loss(nmse.errors, narrow), DataError);
}

TEST(RemseGrad, MatchesFiniteDifferencesWithFrozenFactors) {
  Rng rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 5, 4, 6, 4);  // 4-class instance
    const NmseResult nmse = nmse_loss(fx.W, fx.batch);
    const ErrorMatrix m = accumulate(nmse.errors, 4, ErrorScope::batch);
    const ReweightFactors factors = compute_factors(m, 1.0, 1.0, 1e-12);
    const Matrix analytic = remse_grad(fx.W, fx.batch, factors);
    const Matrix numeric = finite_difference_grad(
        [&](const Matrix& w) {
          return remse_loss(nmse_loss(w, fx.batch).errors, factors);
        },
        fx.W, kFdStep);
    EXPECT_LT(max_relative_error(analytic, numeric), kFdTol);
  }
}

TEST(CombinedLoss, ZeroLambdaEqualsSce) {
  Rng rng(20);
  const Fixture fx = random_fixture(rng, 4, 4, 5, 3);
  LossConfig cfg;
  cfg.tau = 9.0;
  cfg.lambda = 0.0;
  const ReweightFactors unit = ReweightFactors::unit(3, 4);
  EXPECT_DOUBLE_EQ(combined_loss(fx.W, fx.batch, fx.seen_table_norm, cfg, unit),
                   sce_loss(fx.W, fx.batch, fx.seen_table_norm, cfg.tau));
}

TEST(CombinedLoss, UnitFactorsGiveScePlusNmse) {
  Rng rng(21);
  const Fixture fx = random_fixture(rng, 4, 4, 5, 3);
  LossConfig cfg;
  cfg.tau = 9.0;
  cfg.lambda = 1.0;
  const ReweightFactors unit = ReweightFactors::unit(3, 4);
  const double expected = sce_loss(fx.W, fx.batch, fx.seen_table_norm, cfg.tau) +
                          nmse_loss(fx.W, fx.batch).value;
  EXPECT_DOUBLE_EQ(combined_loss(fx.W, fx.batch, fx.seen_table_norm, cfg, unit), expected);
}

TEST(CombinedGrad, MatchesFiniteDifferences) {
  Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const Fixture fx = random_fixture(rng, 4, 4, 6, 3);
    LossConfig cfg;
    cfg.tau = 11.0;
    cfg.lambda = 0.7;
    const NmseResult nmse = nmse_loss(fx.W, fx.batch);
    const ReweightFactors factors =
        compute_factors(accumulate(nmse.errors, 3, ErrorScope::batch), 1.0, 1.0, 1e-12);
    const Matrix analytic = combined_grad(fx.W, fx.batch, fx.seen_table_norm, cfg, factors);
    const Matrix numeric = finite_difference_grad(
        [&](const Matrix& w) {
          const NmseResult inner = nmse_loss(w, fx.batch);
          return sce_loss(w, fx.batch, fx.seen_table_norm, cfg.tau) +
                 cfg.lambda * remse_loss(inner.errors, factors);
        },
        fx.W, kFdStep);
    EXPECT_LT(max_relative_error(analytic, numeric), kFdTol);
  }
}

TEST(Losses, AllNonNegativeOnRandomInstances) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Fixture fx = random_fixture(rng, 5, 4, 6, 4);
    EXPECT_GE(sce_loss(fx.W, fx.batch, fx.seen_table_norm, 20.0), 0.0);
    EXPECT_GE(mse_loss(fx.W, fx.batch), 0.0);
    const NmseResult nmse = nmse_loss(fx.W, fx.batch);
    EXPECT_GE(nmse.value, 0.0);
    for (std::size_t i = 0; i < nmse.errors.residuals_sq.size(); ++i) {
      EXPECT_GE(nmse.errors.residuals_sq.data()[i], 0.0);
    }
    EXPECT_GE(balanced_mse_loss(fx.W, fx.batch, 1.0), 0.0);
    const ReweightFactors factors =
        compute_factors(accumulate(nmse.errors, 4, ErrorScope::batch), 1.5, 0.5, 1e-12);
    EXPECT_GE(remse_loss(nmse.errors, factors), 0.0);
  }
}

TEST(LossConfig, ValidatesHyperParameters) {
  LossConfig good;
  EXPECT_NO_THROW(good.validate());
  LossConfig bad_tau;
  bad_tau.tau = 0.0;
  EXPECT_THROW(bad_tau.validate(), ConfigError);
  LossConfig bad_lambda;
  bad_lambda.lambda = -0.1;
  EXPECT_THROW(bad_lambda.validate(), ConfigError);
  LossConfig bad_sigma;
  bad_sigma.sigma = 0.0;
  EXPECT_THROW(bad_sigma.validate(), ConfigError);
}
