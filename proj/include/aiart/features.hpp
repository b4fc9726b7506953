#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "aiart/imaging.hpp"

namespace aiart {

inline constexpr std::size_t kFeatureCount = 39;

/// Canonical feature order; also the feature-cache CSV header.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "mean_brightness", "entropy_brightness",
    "red_mean", "green_mean", "blue_mean",
    "red_variance", "green_variance", "blue_variance",
    "red_kurtosis", "green_kurtosis", "blue_kurtosis",
    "red_skewness", "green_skewness", "blue_skewness",
    "rgb_entropy",
    "hue_variance", "saturation_variance", "value_variance",
    "hue_kurtosis", "saturation_kurtosis", "value_kurtosis",
    "hue_skewness", "saturation_skewness", "value_skewness",
    "hsv_entropy",
    "contrast", "correlation", "energy", "homogeneity", "lbp_entropy", "lbp_variance",
    "hog_mean", "hog_variance", "hog_kurtosis", "hog_skewness", "hog_entropy", "edgelen",
    "noise_entropy", "snr",
};

/// Position of `name` in kFeatureNames, or kFeatureCount when unknown.
std::size_t feature_index(std::string_view name);

using FeatureVector = std::array<double, kFeatureCount>;

struct ExtractorConfig {
  int resize_side = 255;
  CannyParams canny{};
  int glcm_levels = 32;

  friend bool operator==(const ExtractorConfig& a, const ExtractorConfig& b) {
    return a.resize_side == b.resize_side && a.canny.low == b.canny.low &&
           a.canny.high == b.canny.high && a.canny.sigma == b.canny.sigma &&
           a.glcm_levels == b.glcm_levels;
  }
};

struct BrightnessFeatures {
  double mean = 0.0;
  double entropy = 0.0;
};
BrightnessFeatures extract_brightness(const GrayImage& gray);

/// red/green/blue mean, variance, kurtosis, skewness (channel-major within
/// each statistic) followed by rgb_entropy.
std::array<double, 13> extract_rgb(const RasterImage& image);

/// hue/saturation/value variance, kurtosis, skewness followed by hsv_entropy.
std::array<double, 10> extract_hsv(const RasterImage& image);

/// Normalized symmetric co-occurrence matrix, row-major levels x levels.
struct GlcmMatrix {
  int levels = 0;
  std::vector<double> probabilities;

  double at(int i, int j) const { return probabilities[static_cast<std::size_t>(i) * levels + j]; }
  friend bool operator==(const GlcmMatrix&, const GlcmMatrix&) = default;
};

struct GlcmFeatures {
  double contrast = 0.0;
  double correlation = 0.0;
  double energy = 0.0;
  double homogeneity = 0.0;
};

/// Gray level of an intensity after uniform quantization to `levels` bins.
int quantize_level(double intensity, int levels);

/// Offset (dx=1, dy=0), accumulated in both directions. Width must be >= 2.
GlcmMatrix glcm(const GrayImage& gray, int levels = 32);
/// Correlation of a zero-variance matrix is defined as 1.
GlcmFeatures glcm_features(const GlcmMatrix& m);

/// 8-neighbour radius-1 codes of the interior pixels, row-major. The
/// top-left neighbour is the most significant bit and bits follow clockwise;
/// a neighbour >= centre sets its bit.
std::vector<std::uint8_t> lbp_codes(const GrayImage& gray);

struct LbpFeatures {
  double entropy = 0.0;
  double variance = 0.0;
};
LbpFeatures lbp_features(const GrayImage& gray);

struct HogParams {
  int cell_size = 8;
  int block_cells = 2;
  int bins = 9;
  double epsilon = 1e-6;
  int entropy_bins = 64;
};

/// Flattened block-normalized descriptor. Blocks slide one cell at a time;
/// when the image has a single cell along an axis the block shrinks to it.
std::vector<double> hog_descriptor(const GrayImage& gray, const HogParams& params = {});

struct HogFeatures {
  double mean = 0.0;
  double variance = 0.0;
  double kurtosis = 0.0;
  double skewness = 0.0;
  double entropy = 0.0;
};
HogFeatures summarize_hog(std::span<const double> descriptor, int entropy_bins = 64);
HogFeatures hog_features(const GrayImage& gray, const HogParams& params = {});

double edgelen(const GrayImage& gray, const CannyParams& params = {});

struct NoiseFeatures {
  double entropy = 0.0;
  double snr = 0.0;
};
inline constexpr double kSnrEpsilon = 1e-8;
inline constexpr double kSnrCap = 1e6;
NoiseFeatures noise_features(const GrayImage& gray);

/// Resizes to config.resize_side, then computes every family in canonical order.
FeatureVector extract_all(const RasterImage& image, const ExtractorConfig& config = {});

}  // namespace aiart
