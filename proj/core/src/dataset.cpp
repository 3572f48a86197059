#include "remse/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "remse/error.hpp"
#include "remse/text.hpp"

namespace remse {

namespace {

constexpr char kFeatureMagic[4] = {'Z', 'S', 'L', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_f64_le(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double read_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

Matrix SemanticTable::masked() const {
  Matrix out = raw;
  if (!missing_marker.has_value()) return out;
  for (std::size_t c = 0; c < out.rows(); ++c)
    for (std::size_t j = 0; j < out.cols(); ++j)
      if (raw(c, j) == *missing_marker) out(c, j) = 0.0;
  return out;
}

void SemanticTable::validate() const {
  if (raw.rows() == 0 || raw.cols() == 0) throw DataError("semantic table is empty");
  if (!raw.all_finite()) throw DataError("semantic table contains non-finite values");
  if (!(value_range[0] < value_range[1])) {
    throw DataError("semantic value_range is not an interval: [" + format_double(value_range[0]) +
                    ", " + format_double(value_range[1]) + "]");
  }
  if (semantic_names.size() != semantic_dim()) {
    throw DataError("semantic name count " + std::to_string(semantic_names.size()) +
                    " != semantic dim " + std::to_string(semantic_dim()));
  }
  for (std::size_t c = 0; c < class_count(); ++c) {
    for (std::size_t j = 0; j < semantic_dim(); ++j) {
      if (is_missing(c, j)) continue;
      const double v = raw(c, j);
      if (v < value_range[0] || v > value_range[1]) {
        throw DataError("semantic value " + format_double(v) + " for class " + std::to_string(c) +
                        " column " + std::to_string(j) + " outside declared range");
      }
    }
  }
  const Matrix m = masked();
  for (std::size_t c = 0; c < class_count(); ++c) {
    if (l2_norm(m.row(c)) == 0.0) {
      throw DataError("class " + std::to_string(c) + " has a zero semantic vector after masking");
    }
  }
}

Matrix normalize_semantics(const SemanticTable& table) {
  Matrix out = table.masked();
  for (std::size_t c = 0; c < out.rows(); ++c) {
    const double norm = l2_norm(out.row(c));
    if (norm == 0.0) {
      throw DataError("cannot normalize class " + std::to_string(c) +
                      ": zero semantic vector after masking");
    }
    for (std::size_t j = 0; j < out.cols(); ++j) out(c, j) /= norm;
  }
  return out;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test_seen: return "test_seen";
    case Split::test_unseen: return "test_unseen";
  }
  return "?";
}

bool SplitManifest::is_seen_class(int class_id) const {
  return std::find(seen_class_ids.begin(), seen_class_ids.end(), class_id) !=
         seen_class_ids.end();
}

void Dataset::validate() const {
  table.validate();
  const std::size_t n = store.instance_count();
  const std::size_t class_count = table.class_count();
  if (!store.features.all_finite()) throw DataError("features contain non-finite values");
  if (store.labels.size() != n) {
    throw DataError("label count " + std::to_string(store.labels.size()) + " != instance count " +
                    std::to_string(n));
  }
  if (store.split_tags.size() != n) throw DataError("split tag count != instance count");

  std::vector<bool> seen_mask(class_count, false);
  std::vector<bool> unseen_mask(class_count, false);
  for (int id : manifest.seen_class_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= class_count)
      throw DataError("seen class id out of range: " + std::to_string(id));
    if (seen_mask[static_cast<std::size_t>(id)])
      throw DataError("duplicate seen class id: " + std::to_string(id));
    seen_mask[static_cast<std::size_t>(id)] = true;
  }
  for (int id : manifest.unseen_class_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= class_count)
      throw DataError("unseen class id out of range: " + std::to_string(id));
    if (seen_mask[static_cast<std::size_t>(id)])
      throw DataError("class " + std::to_string(id) + " listed as both seen and unseen");
    if (unseen_mask[static_cast<std::size_t>(id)])
      throw DataError("duplicate unseen class id: " + std::to_string(id));
    unseen_mask[static_cast<std::size_t>(id)] = true;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const int label = store.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= class_count) {
      throw DataError("instance " + std::to_string(i) + " label out of range: " +
                      std::to_string(label));
    }
  }

  std::vector<int> cover(n, -1);
  auto check_split = [&](const std::vector<std::size_t>& indices, Split tag) {
    for (std::size_t idx : indices) {
      if (idx >= n) {
        throw DataError(std::string(split_name(tag)) + " index out of range: " +
                        std::to_string(idx));
      }
      if (cover[idx] != -1) {
        throw DataError("instance " + std::to_string(idx) + " assigned to multiple splits");
      }
      cover[idx] = static_cast<int>(tag);
      if (store.split_tags[idx] != tag) {
        throw DataError("instance " + std::to_string(idx) + " split tag disagrees with manifest");
      }
      const int label = store.labels[idx];
      const bool label_seen = seen_mask[static_cast<std::size_t>(label)];
      const bool label_unseen = unseen_mask[static_cast<std::size_t>(label)];
      if (tag == Split::test_unseen) {
        if (!label_unseen) {
          throw DataError("split violation: test_unseen instance " + std::to_string(idx) +
                          " labeled with class " + std::to_string(label) +
                          " which is not an unseen class");
        }
      } else if (!label_seen) {
        throw DataError("split violation: " + std::string(split_name(tag)) + " instance " +
                        std::to_string(idx) + " labeled with class " + std::to_string(label) +
                        " which is not a seen class");
      }
    }
  };
  check_split(manifest.train_indices, Split::train);
  check_split(manifest.test_seen_indices, Split::test_seen);
  check_split(manifest.test_unseen_indices, Split::test_unseen);
  for (std::size_t i = 0; i < n; ++i) {
    if (cover[i] == -1) throw DataError("instance " + std::to_string(i) + " belongs to no split");
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

  // attributes.csv
  {
    std::string out = "class_id";
    for (const auto& name : dataset.table.semantic_names) out += "," + name;
    out += "\n";
    for (std::size_t c = 0; c < dataset.table.class_count(); ++c) {
      out += std::to_string(c);
      for (std::size_t j = 0; j < dataset.table.semantic_dim(); ++j) {
        out += "," + format_double(dataset.table.raw(c, j));
      }
      out += "\n";
    }
    write_file(dir / "attributes.csv", out);
  }

  // features.bin
  {
    const auto& f = dataset.store.features;
    std::string out;
    out.reserve(16 + f.size() * 8);
    out.append(kFeatureMagic, 4);
    append_u32_le(out, kFeatureVersion);
    append_u32_le(out, static_cast<std::uint32_t>(f.rows()));
    append_u32_le(out, static_cast<std::uint32_t>(f.cols()));
    for (std::size_t i = 0; i < f.size(); ++i) append_f64_le(out, f.data()[i]);
    write_file(dir / "features.bin", out);
  }

  // manifest.json
  {
    nlohmann::json j;
    j["seen_class_ids"] = dataset.manifest.seen_class_ids;
    j["unseen_class_ids"] = dataset.manifest.unseen_class_ids;
    j["labels"] = dataset.store.labels;
    j["splits"] = {{"train", dataset.manifest.train_indices},
                   {"test_seen", dataset.manifest.test_seen_indices},
                   {"test_unseen", dataset.manifest.test_unseen_indices}};
    j["value_range"] = dataset.table.value_range;
    if (dataset.table.missing_marker.has_value()) {
      j["missing_marker"] = *dataset.table.missing_marker;
    } else {
      j["missing_marker"] = nullptr;
    }
    write_file(dir / "manifest.json", j.dump(2) + "\n");
  }
}

namespace {

SemanticTable load_attributes(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("attributes.csv: empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "class_id") {
    throw DataError("attributes.csv: header must start with class_id");
  }
  SemanticTable table;
  table.semantic_names.assign(header.begin() + 1, header.end());
  const std::size_t d_s = table.semantic_names.size();

  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d_s + 1) {
      throw DataError("attributes.csv: row " + std::to_string(row) + " has " +
                      std::to_string(fields.size() - 1) + " values, expected " +
                      std::to_string(d_s));
    }
    if (parse_long(fields[0]) != static_cast<long>(row)) {
      throw DataError("attributes.csv: row " + std::to_string(row) + " has class_id " +
                      fields[0] + "; ids must be consecutive from 0");
    }
    for (std::size_t j = 0; j < d_s; ++j) values.push_back(parse_double(fields[j + 1]));
    ++row;
  }
  if (row == 0) throw DataError("attributes.csv: no class rows");
  table.raw = Matrix(row, d_s);
  std::copy(values.begin(), values.end(), table.raw.data());
  return table;
}

Matrix load_features(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16) throw DataError("features.bin: truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kFeatureMagic, 4) != 0) throw DataError("features.bin: bad magic");
  const std::uint32_t version = read_u32_le(p + 4);
  if (version != kFeatureVersion) {
    throw DataError("features.bin: unsupported version " + std::to_string(version));
  }
  const std::uint32_t n = read_u32_le(p + 8);
  const std::uint32_t d_v = read_u32_le(p + 12);
  const std::size_t expected = 16 + static_cast<std::size_t>(n) * d_v * 8;
  if (bytes.size() != expected) {
    throw DataError("features.bin: size " + std::to_string(bytes.size()) + " != expected " +
                    std::to_string(expected) + " for " + std::to_string(n) + "x" +
                    std::to_string(d_v));
  }
  Matrix features(n, d_v);
  for (std::size_t i = 0; i < features.size(); ++i) {
    features.data()[i] = read_f64_le(p + 16 + i * 8);
  }
  return features;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.table = load_attributes(dir / "attributes.csv");
  ds.store.features = load_features(dir / "features.bin");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  try {
    ds.manifest.seen_class_ids = j.at("seen_class_ids").get<std::vector<int>>();
    ds.manifest.unseen_class_ids = j.at("unseen_class_ids").get<std::vector<int>>();
    ds.store.labels = j.at("labels").get<std::vector<int>>();
    const auto& splits = j.at("splits");
    ds.manifest.train_indices = splits.at("train").get<std::vector<std::size_t>>();
    ds.manifest.test_seen_indices = splits.at("test_seen").get<std::vector<std::size_t>>();
    ds.manifest.test_unseen_indices = splits.at("test_unseen").get<std::vector<std::size_t>>();
    ds.table.value_range = j.at("value_range").get<std::array<double, 2>>();
    if (!j.at("missing_marker").is_null()) {
      ds.table.missing_marker = j.at("missing_marker").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }

  if (ds.store.labels.size() != ds.store.instance_count()) {
    throw DataError("manifest.json: labels length " + std::to_string(ds.store.labels.size()) +
                    " != instance count " + std::to_string(ds.store.instance_count()));
  }
  ds.store.split_tags.assign(ds.store.instance_count(), Split::train);
  auto tag_all = [&](const std::vector<std::size_t>& indices, Split tag) {
    for (std::size_t idx : indices) {
      if (idx >= ds.store.split_tags.size()) {
        throw DataError("manifest.json: split index out of range: " + std::to_string(idx));
      }
      ds.store.split_tags[idx] = tag;
    }
  };
  tag_all(ds.manifest.train_indices, Split::train);
  tag_all(ds.manifest.test_seen_indices, Split::test_seen);
  tag_all(ds.manifest.test_unseen_indices, Split::test_unseen);

  ds.validate();
  return ds;
}

}  // namespace remse
