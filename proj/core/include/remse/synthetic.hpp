#pragma once

#include "remse/dataset.hpp"
#include "remse/rng.hpp"

namespace remse {

/// Synthetic benchmark with label-value-correlated noise. Class semantic
/// vectors get heavy-tailed (log-uniform) per-dimension magnitudes; features
/// are a fixed random full-rank lift of the semantic vector plus noise whose
/// per-dimension scale grows as value^gamma. With gamma > 0 a plain-MSE
/// model ends up with prediction errors positively correlated with label
/// value, which is the regime the rebalanced losses are meant to fix.
struct SynthConfig {
  int classes = 20;
  int seen = 15;            // classes 0..seen-1 are seen, the rest unseen
  int semantic_dim = 16;
  int feature_dim = 32;
  int per_class = 30;
  double noise = 0.1;       // base noise scale
  double gamma = 1.0;       // heteroscedasticity exponent
  double range_lo = 0.0;
  double range_hi = 100.0;
  double train_fraction = 0.8;  // per seen class; remainder is test_seen

  void validate() const;  // throws ConfigError
};

Dataset generate_synthetic(const SynthConfig& cfg, Rng& rng);

}  // namespace remse
