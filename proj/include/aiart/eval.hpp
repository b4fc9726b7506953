#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aiart/models.hpp"
#include "aiart/neural.hpp"
#include "aiart/select.hpp"

namespace aiart {

/// Fraction of exact matches. ShapeError on length mismatch or empty input.
double accuracy(std::span<const int> truth, std::span<const int> predicted);

/// Rows are true classes, columns predicted classes, both in `labels` order.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<long>> counts;

  long total() const;
  long trace() const;
  long row_total(std::size_t row) const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Labels are class indices into `labels`; anything outside raises LabelError.
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          std::vector<std::string> labels);

struct ClassMetrics {
  std::string label;
  long support = 0;
  double precision = 0.0;  // 0 when nothing was predicted as this class
  double recall = 0.0;
};

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& matrix);

/// Errors on human-made rows (class names without the "AI-" prefix), split
/// into those predicted as another human class and those predicted as an AI
/// class.
struct ProvenanceErrors {
  long within_human = 0;
  long human_as_ai = 0;
};

ProvenanceErrors provenance_errors(const ConfusionMatrix& matrix);

struct ExperimentReport {
  Task task = Task::binary;
  std::string model_family;
  std::string best_config;
  std::vector<std::string> feature_names;
  double cv_mean_accuracy = 0.0;
  double test_accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<CellResult> grid;
  std::optional<RFECurve> rfe_curve;
  std::vector<EpochMetrics> epochs;
  std::uint64_t seed = 0;
  std::string extractor_config_hash;
  std::vector<std::string> notes;
};

/// fnv1a64 of the extractor fingerprint, as 16 hex digits.
std::string extractor_hash(const ExtractorConfig& config);

/// File name -> content. Always summary.txt, accuracy.csv and confusion.csv;
/// grid.csv, rfe_curve.csv and epochs.csv only when the report has that data.
std::vector<std::pair<std::string, std::string>> render_report(const ExperimentReport& report);

void write_report(const ExperimentReport& report, const std::filesystem::path& directory);

std::string format_epochs_csv(std::span<const EpochMetrics> epochs);
std::string format_rfe_csv(const RFECurve& curve);

}  // namespace aiart
