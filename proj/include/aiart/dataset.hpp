#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aiart/features.hpp"
#include "aiart/matrix.hpp"

namespace aiart {

struct ManifestEntry {
  std::filesystem::path path;
  int class_label = 0;
};

/// root/<class_name>/<image files>, classes and files in lexicographic order.
struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;
  std::vector<std::string> warnings;
};

Manifest scan(const std::filesystem::path& root);

/// 1 for class names starting with "AI-" (any case), otherwise 0.
int binary_label_for(std::string_view class_name);

struct FeatureRow {
  std::vector<double> features;
  int class_label = 0;
  int binary_label = 0;
  std::string path;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<FeatureRow> rows;

  std::size_t size() const { return rows.size(); }
  Matrix matrix() const;
  std::vector<int> class_labels() const;
  std::vector<int> binary_labels() const;
  /// Same rows restricted to the named columns, in the given order.
  FeatureTable project(std::span<const std::string> names) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

std::vector<std::string> canonical_feature_names();

/// CSV: feature columns, class_label (class name), binary_label, path.
std::string format_feature_csv(const FeatureTable& table);
void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);
/// Class names are recovered as the sorted set of class_label values.
FeatureTable read_feature_csv(const std::filesystem::path& path);

struct BuildFailure {
  std::string path;
  std::string message;
};

struct BuildReport {
  std::size_t extracted = 0;
  std::size_t cached = 0;
  std::vector<BuildFailure> failures;
};

struct BuildOptions {
  ExtractorConfig extractor{};
  unsigned threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
};

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Canonical JSON text of the extractor settings; equal text means equal features.
std::string extractor_fingerprint(const ExtractorConfig& config);
/// Settings recorded in a cache sidecar; nullopt when absent or unreadable.
std::optional<ExtractorConfig> read_sidecar_extractor(const std::filesystem::path& csv_path);

/// Extracts one row per decodable image. When `cache_csv` is non-empty, an
/// existing cache whose header and extractor configuration match is reused for
/// every row whose path and content hash are unchanged; the refreshed CSV and
/// its JSON sidecar are written back. Throws EmptyDataset if nothing decodes.
FeatureTable build_feature_table(const Manifest& manifest, const std::filesystem::path& cache_csv,
                                 const BuildOptions& options, BuildReport* report = nullptr);

/// Index partition. Validation is empty for two-way splits.
struct SplitIndex {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> validation;
  std::uint64_t seed = 0;
};

/// ratios are train:test[:validation] and must sum to 1. Per class the members
/// are shuffled and sliced with largest-remainder rounding.
SplitIndex stratified_split(std::span<const int> labels, std::span<const double> ratios,
                            std::uint64_t seed, std::span<const std::string> class_names = {});

/// Stratified k-fold; every index appears in exactly one test fold.
std::vector<SplitIndex> kfold(std::span<const int> labels, int k, std::uint64_t seed,
                              std::span<const std::string> class_names = {});

}  // namespace aiart
