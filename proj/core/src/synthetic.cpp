#include "remse/synthetic.hpp"

#include <cmath>
#include <string>

#include "remse/error.hpp"

namespace remse {

void SynthConfig::validate() const {
  if (classes < 2) throw ConfigError("synth: need at least 2 classes");
  if (seen < 1 || seen >= classes) {
    throw ConfigError("synth: seen class count " + std::to_string(seen) +
                      " must be in [1, classes), classes = " + std::to_string(classes));
  }
  if (semantic_dim < 2) throw ConfigError("synth: semantic_dim must be >= 2");
  if (feature_dim < semantic_dim) {
    throw ConfigError("synth: feature_dim " + std::to_string(feature_dim) +
                      " < semantic_dim " + std::to_string(semantic_dim));
  }
  if (per_class < 2) throw ConfigError("synth: per_class must be >= 2");
  if (noise < 0.0) throw ConfigError("synth: noise must be >= 0");
  if (gamma < 0.0) throw ConfigError("synth: gamma must be >= 0");
  if (!(range_lo < range_hi)) throw ConfigError("synth: range_lo must be < range_hi");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("synth: train_fraction must be in (0, 1)");
  }
}

Dataset generate_synthetic(const SynthConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto classes = static_cast<std::size_t>(cfg.classes);
  const auto d_s = static_cast<std::size_t>(cfg.semantic_dim);
  const auto d_v = static_cast<std::size_t>(cfg.feature_dim);
  const auto per_class = static_cast<std::size_t>(cfg.per_class);

  Dataset ds;
  ds.table.value_range = {cfg.range_lo, cfg.range_hi};
  ds.table.semantic_names.reserve(d_s);
  for (std::size_t j = 0; j < d_s; ++j) ds.table.semantic_names.push_back("a" + std::to_string(j));

  // Log-uniform magnitudes so per-dimension values span orders of magnitude.
  const double lo_eff = std::max(cfg.range_lo, cfg.range_hi * 1e-3);
  ds.table.raw = Matrix(classes, d_s);
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t j = 0; j < d_s; ++j) ds.table.raw(c, j) = rng.log_uniform(lo_eff, cfg.range_hi);

  // Fixed lift from semantic space into feature space.
  Matrix lift(d_v, d_s);
  const double lift_scale = 1.0 / std::sqrt(static_cast<double>(d_s));
  for (std::size_t i = 0; i < lift.size(); ++i) lift.data()[i] = rng.normal(0.0, lift_scale);

  const std::size_t total = classes * per_class;
  ds.store.features = Matrix(total, d_v);
  ds.store.labels.reserve(total);
  ds.store.split_tags.reserve(total);

  const auto train_per_class =
      std::min(per_class - 1,
               static_cast<std::size_t>(std::ceil(cfg.train_fraction * static_cast<double>(per_class))));

  std::vector<double> noisy(d_s);
  std::size_t instance = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const bool seen_class = c < static_cast<std::size_t>(cfg.seen);
    for (std::size_t k = 0; k < per_class; ++k, ++instance) {
      for (std::size_t j = 0; j < d_s; ++j) {
        const double value = ds.table.raw(c, j);
        const double sd = cfg.noise * std::pow(value, cfg.gamma);
        noisy[j] = value + rng.normal(0.0, sd);
      }
      for (std::size_t r = 0; r < d_v; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d_s; ++j) acc += lift(r, j) * noisy[j];
        ds.store.features(instance, r) = acc;
      }
      ds.store.labels.push_back(static_cast<int>(c));
      Split tag;
      if (!seen_class) {
        tag = Split::test_unseen;
        ds.manifest.test_unseen_indices.push_back(instance);
      } else if (k < train_per_class) {
        tag = Split::train;
        ds.manifest.train_indices.push_back(instance);
      } else {
        tag = Split::test_seen;
        ds.manifest.test_seen_indices.push_back(instance);
      }
      ds.store.split_tags.push_back(tag);
    }
    if (seen_class) {
      ds.manifest.seen_class_ids.push_back(static_cast<int>(c));
    } else {
      ds.manifest.unseen_class_ids.push_back(static_cast<int>(c));
    }
  }

  ds.validate();
  return ds;
}

}  // namespace remse
