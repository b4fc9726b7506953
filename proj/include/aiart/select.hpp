#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aiart/matrix.hpp"
#include "aiart/models.hpp"
#include "aiart/neural.hpp"

namespace aiart {

enum class ModelFamily { lr, svm, mlp };
std::string to_string(ModelFamily family);
ModelFamily parse_family(std::string_view text);

using AnyConfig = std::variant<LRConfig, SVMConfig, MLPConfig>;
using AnyModel = std::variant<LRModel, SVMModel, MLPModel>;

ModelFamily family_of(const AnyConfig& config);
ModelFamily family_of(const AnyModel& model);

/// One hyperparameter assignment, e.g. {"C", "10"}.
using Setting = std::pair<std::string, std::string>;

/// Builds a config from textual settings on top of the family defaults.
/// Unknown names and out-of-domain values raise InvalidInput. The LR "solver"
/// setting is accepted and recorded but has no effect: one optimizer serves all.
AnyConfig make_config(ModelFamily family, std::span<const Setting> settings);
/// Non-empty when the settings name a combination this toolkit does not train.
std::optional<std::string> unsupported_reason(ModelFamily family, std::span<const Setting> settings);
/// Deterministic text naming every effective field at full precision.
std::string describe(const AnyConfig& config);

AnyModel fit_model(const Matrix& x, std::span<const int> y, const AnyConfig& config, Task task);
std::vector<int> predict_labels(const AnyModel& model, const Matrix& x);
/// Per-row class scores (probabilities, or decision values for SVM).
Matrix predict_scores(const AnyModel& model, const Matrix& x);

struct GridAxis {
  std::string name;
  std::vector<std::string> values;
};

struct GridSpec {
  ModelFamily family = ModelFamily::lr;
  std::vector<GridAxis> axes;

  std::size_t cell_count() const;
  /// Settings of cell `index`; the last axis varies fastest.
  std::vector<Setting> cell(std::size_t index) const;
};

/// The hyperparameter value sets searched for each family.
GridSpec reference_grid(ModelFamily family);

enum class CellStatus { ok, skipped, failed };
std::string to_string(CellStatus status);

struct CellResult {
  std::size_t index = 0;
  std::vector<Setting> settings;
  CellStatus status = CellStatus::ok;
  std::string message;  // skip reason or error text
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

/// Called with the table row indices used to fit the scaler and model of a fold.
using FitObserver = std::function<void(std::size_t fold, std::span<const std::size_t> fit_rows)>;

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;  // for error messages only
  FitObserver observer;
};

/// k-fold accuracy of `config` over the given rows of (x, y). The scaler is
/// fitted on each fold's training part only.
std::vector<double> cv_accuracy(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                const AnyConfig& config, Task task, const CvOptions& options);

struct GridResult {
  std::vector<CellResult> cells;
  std::size_t best = 0;  // index into cells
  AnyConfig best_config;
};

/// Exhaustive search; best = highest mean CV accuracy, ties to the earlier
/// cell. Training errors mark the cell failed. Throws TrainingError when no
/// cell succeeds.
GridResult grid_search(const GridSpec& grid, const Matrix& x, std::span<const int> y,
                       std::span<const std::size_t> rows, Task task, const CvOptions& options);

struct RFEPoint {
  std::size_t feature_count = 0;
  std::vector<std::string> kept_features;
  double cv_accuracy = 0.0;
  std::vector<double> fold_accuracy;
  std::string dropped_feature;  // eliminated after this point; empty at 1
};

struct RFECurve {
  std::vector<RFEPoint> points;  // counts from the starting width down to 1
  std::string ranker;
};

/// Recursive elimination, one feature per step. Importance is the mean
/// absolute weight of an L2 logistic surrogate (C = 1) fitted on each fold's
/// standardized training part, averaged over folds and logits. The same folds
/// score every step.
RFECurve rfe(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
             std::span<const std::string> feature_names, const AnyConfig& config, Task task,
             const CvOptions& options);

/// Best point of a curve; ties go to the smaller feature count.
const RFEPoint& best_point(const RFECurve& curve);

}  // namespace aiart
