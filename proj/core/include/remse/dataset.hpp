#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "remse/matrix.hpp"

namespace remse {

/// Per-class semantic label vectors s_c plus the declared metadata of their
/// value range. Entries equal to the missing marker are masked to zero before
/// any normalization; the mask stays queryable so diagnostics can skip them.
struct SemanticTable {
  Matrix raw;  // C x d_s, missing entries stored as-is
  std::array<double, 2> value_range{0.0, 1.0};
  std::optional<double> missing_marker;
  std::vector<std::string> semantic_names;  // d_s column names

  std::size_t class_count() const { return raw.rows(); }
  std::size_t semantic_dim() const { return raw.cols(); }

  bool is_missing(std::size_t c, std::size_t j) const {
    return missing_marker.has_value() && raw(c, j) == *missing_marker;
  }

  /// Raw values with missing entries replaced by exact zeros.
  Matrix masked() const;

  /// Checks the declared range and that every masked class vector is nonzero.
  void validate() const;
};

/// Rows of masked(table), each scaled to unit l2 norm (the t_c of the
/// classifier). Throws DataError naming the class if a masked row is zero.
Matrix normalize_semantics(const SemanticTable& table);

enum class Split : std::uint8_t { train, test_seen, test_unseen };

const char* split_name(Split s);

/// Instance features with labels and split membership.
struct FeatureStore {
  Matrix features;  // N x d_v
  std::vector<int> labels;
  std::vector<Split> split_tags;

  std::size_t instance_count() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
};

struct SplitManifest {
  std::vector<int> seen_class_ids;
  std::vector<int> unseen_class_ids;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_seen_indices;
  std::vector<std::size_t> test_unseen_indices;

  bool is_seen_class(int class_id) const;
};

struct Dataset {
  SemanticTable table;
  FeatureStore store;
  SplitManifest manifest;

  /// All cross-structure invariants: disjoint class sets, full split
  /// coverage, split/label agreement, dimension consistency.
  void validate() const;
};

/// Directory layout: attributes.csv, features.bin, manifest.json.
/// save followed by load reproduces the dataset bit-exactly.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace remse
