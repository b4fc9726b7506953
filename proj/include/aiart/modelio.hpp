#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aiart/features.hpp"
#include "aiart/models.hpp"
#include "aiart/neural.hpp"
#include "aiart/preprocess.hpp"

namespace aiart {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to predict without the training data. Feature models
/// carry their scaler and column list; CNN models carry input side and
/// architecture inside their config.
struct ModelFile {
  Task task = Task::binary;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  std::optional<Scaler> scaler;
  std::variant<LRModel, SVMModel, MLPModel, CNNModel> model;
  ExtractorConfig extractor{};
  std::uint64_t seed = 0;
  std::string config;  // human-readable hyperparameters

  std::string family() const;
};

/// JSON envelope {"format": "aiart-model", "format_version": 1, ...}. Doubles
/// are written in shortest round-trip form, so reloading is exact.
std::string serialize_model(const ModelFile& file);
/// UnsupportedModelFile for a foreign, newer or damaged file.
ModelFile parse_model(std::string_view text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace aiart
