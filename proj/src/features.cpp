#include "aiart/features.hpp"

#include <algorithm>
#include <cmath>

#include "aiart/error.hpp"
#include "aiart/statcore.hpp"

namespace aiart {

std::size_t feature_index(std::string_view name) {
  const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
  return static_cast<std::size_t>(it - kFeatureNames.begin());
}

BrightnessFeatures extract_brightness(const GrayImage& gray) {
  const auto values = gray.values();
  return {describe(values).mean, shannon_entropy(build_histogram(values, 256, 0.0, 256.0))};
}

std::array<double, 13> extract_rgb(const RasterImage& image) {
  const auto pixels = image.pixels();
  std::array<std::vector<double>, 3> channels;
  for (auto& c : channels) c.reserve(pixels.size());
  for (const auto& p : pixels) {
    channels[0].push_back(p.r);
    channels[1].push_back(p.g);
    channels[2].push_back(p.b);
  }
  std::array<double, 13> out{};
  double entropy = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto stats = describe(channels[c]);
    out[c] = stats.mean;
    out[3 + c] = stats.variance;
    out[6 + c] = stats.kurtosis;
    out[9 + c] = stats.skewness;
    entropy += shannon_entropy(build_histogram(channels[c], 256, 0.0, 256.0));
  }
  out[12] = entropy / 3.0;
  return out;
}

std::array<double, 10> extract_hsv(const RasterImage& image) {
  const auto hsv = to_hsv(image);
  std::array<std::vector<double>, 3> channels;
  for (auto& c : channels) c.reserve(hsv.pixels.size());
  for (const auto& p : hsv.pixels) {
    channels[0].push_back(p.h);
    channels[1].push_back(p.s);
    channels[2].push_back(p.v);
  }
  std::array<double, 10> out{};
  double entropy = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto stats = describe(channels[c]);
    out[c] = stats.variance;
    out[3 + c] = stats.kurtosis;
    out[6 + c] = stats.skewness;
    entropy += shannon_entropy(build_histogram(channels[c], 256, 0.0, 1.0));
  }
  out[9] = entropy / 3.0;
  return out;
}

int quantize_level(double intensity, int levels) {
  const int level = static_cast<int>(std::floor(intensity * levels / 256.0));
  return std::clamp(level, 0, levels - 1);
}

GlcmMatrix glcm(const GrayImage& gray, int levels) {
  if (gray.width() < 2) throw InvalidInput("GLCM needs an image at least 2 pixels wide");
  if (levels < 1) throw InvalidInput("GLCM needs at least one gray level");
  const auto n = static_cast<std::size_t>(levels);
  std::vector<std::uint64_t> counts(n * n, 0);
  for (int y = 0; y < gray.height(); ++y) {
    int left = quantize_level(gray.at(0, y), levels);
    for (int x = 1; x < gray.width(); ++x) {
      const int right = quantize_level(gray.at(x, y), levels);
      ++counts[static_cast<std::size_t>(left) * n + right];
      ++counts[static_cast<std::size_t>(right) * n + left];
      left = right;
    }
  }
  const auto total = static_cast<double>(2ULL * (gray.width() - 1) * gray.height());
  GlcmMatrix m{levels, std::vector<double>(n * n)};
  for (std::size_t i = 0; i < counts.size(); ++i) m.probabilities[i] = counts[i] / total;
  return m;
}

GlcmFeatures glcm_features(const GlcmMatrix& m) {
  const int L = m.levels;
  double mu_i = 0.0, mu_j = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      mu_i += i * m.at(i, j);
      mu_j += j * m.at(i, j);
    }
  GlcmFeatures f;
  double var_i = 0.0, var_j = 0.0, cov = 0.0, sum_sq = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = m.at(i, j);
      if (p == 0.0) continue;
      const double d = i - j;
      f.contrast += p * d * d;
      f.homogeneity += p / (1.0 + std::abs(d));
      sum_sq += p * p;
      var_i += p * (i - mu_i) * (i - mu_i);
      var_j += p * (j - mu_j) * (j - mu_j);
      cov += p * (i - mu_i) * (j - mu_j);
    }
  f.energy = std::sqrt(sum_sq);
  const double denom = std::sqrt(var_i * var_j);
  f.correlation = denom > 1e-15 ? cov / denom : 1.0;
  return f;
}

std::vector<std::uint8_t> lbp_codes(const GrayImage& gray) {
  if (gray.width() < 3 || gray.height() < 3) throw InvalidInput("LBP needs an image of at least 3x3");
  static constexpr int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  static constexpr int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  std::vector<std::uint8_t> codes;
  codes.reserve(static_cast<std::size_t>(gray.width() - 2) * (gray.height() - 2));
  for (int y = 1; y < gray.height() - 1; ++y)
    for (int x = 1; x < gray.width() - 1; ++x) {
      const double center = gray.at(x, y);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k) code = (code << 1) | (gray.at(x + dx[k], y + dy[k]) >= center ? 1u : 0u);
      codes.push_back(static_cast<std::uint8_t>(code));
    }
  return codes;
}

LbpFeatures lbp_features(const GrayImage& gray) {
  const auto codes = lbp_codes(gray);
  std::vector<std::uint64_t> counts(256, 0);
  std::vector<double> values(codes.begin(), codes.end());
  for (auto c : codes) ++counts[c];
  return {shannon_entropy(counts), describe(values).variance};
}

std::vector<double> hog_descriptor(const GrayImage& gray, const HogParams& params) {
  const int w = gray.width(), h = gray.height(), cell = params.cell_size;
  const int cells_x = w / cell, cells_y = h / cell;
  if (cells_x < 1 || cells_y < 1) throw InvalidInput("HOG needs at least one full cell");
  const auto bins = static_cast<std::size_t>(params.bins);
  const double bin_width = 180.0 / params.bins;

  std::vector<double> hist(static_cast<std::size_t>(cells_x) * cells_y * bins, 0.0);
  for (int y = 0; y < cells_y * cell; ++y)
    for (int x = 0; x < cells_x * cell; ++x) {
      const double gx = (x > 0 && x < w - 1) ? gray.at(x + 1, y) - gray.at(x - 1, y) : 0.0;
      const double gy = (y > 0 && y < h - 1) ? gray.at(x, y + 1) - gray.at(x, y - 1) : 0.0;
      const double magnitude = std::hypot(gx, gy);
      if (magnitude == 0.0) continue;
      double angle = std::atan2(gy, gx) * (180.0 / 3.14159265358979323846);
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      const double pos = angle / bin_width - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const auto b0 = static_cast<std::size_t>((static_cast<long>(lower) + params.bins) % params.bins);
      const auto b1 = (b0 + 1) % bins;
      double* cell_hist = &hist[(static_cast<std::size_t>(y / cell) * cells_x + x / cell) * bins];
      cell_hist[b0] += (1.0 - frac) * magnitude;
      cell_hist[b1] += frac * magnitude;
    }

  const int block_x = std::min(params.block_cells, cells_x);
  const int block_y = std::min(params.block_cells, cells_y);
  const int blocks_x = cells_x - block_x + 1, blocks_y = cells_y - block_y + 1;
  const std::size_t block_len = static_cast<std::size_t>(block_x) * block_y * bins;
  std::vector<double> descriptor;
  descriptor.reserve(static_cast<std::size_t>(blocks_x) * blocks_y * block_len);
  std::vector<double> block(block_len);
  const double eps2 = params.epsilon * params.epsilon;
  for (int by = 0; by < blocks_y; ++by)
    for (int bx = 0; bx < blocks_x; ++bx) {
      std::size_t k = 0;
      double norm2 = 0.0;
      for (int cy = by; cy < by + block_y; ++cy)
        for (int cx = bx; cx < bx + block_x; ++cx)
          for (std::size_t b = 0; b < bins; ++b) {
            const double v = hist[(static_cast<std::size_t>(cy) * cells_x + cx) * bins + b];
            block[k++] = v;
            norm2 += v * v;
          }
      const double scale = 1.0 / std::sqrt(norm2 + eps2);
      for (double v : block) descriptor.push_back(v * scale);
    }
  return descriptor;
}

HogFeatures summarize_hog(std::span<const double> descriptor, int entropy_bins) {
  const auto stats = describe(descriptor);
  return {stats.mean, stats.variance, stats.kurtosis, stats.skewness,
          shannon_entropy(build_histogram(descriptor, static_cast<std::size_t>(entropy_bins), 0.0, 1.0))};
}

HogFeatures hog_features(const GrayImage& gray, const HogParams& params) {
  return summarize_hog(hog_descriptor(gray, params), params.entropy_bins);
}

double edgelen(const GrayImage& gray, const CannyParams& params) {
  return static_cast<double>(canny(gray, params).count());
}

NoiseFeatures noise_features(const GrayImage& gray) {
  const GrayImage denoised = median3(gray);
  std::vector<double> residual(gray.values().size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = gray.values()[i] - denoised.values()[i];
  NoiseFeatures f;
  f.entropy = shannon_entropy(build_histogram(residual, 511, -255.0, 255.0));
  const auto stats = describe(gray.values());
  f.snr = std::min(stats.mean / (std::sqrt(stats.variance) + kSnrEpsilon), kSnrCap);
  return f;
}

FeatureVector extract_all(const RasterImage& image, const ExtractorConfig& config) {
  const RasterImage resized = resize_bilinear(image, config.resize_side);
  const GrayImage gray = to_gray(resized);

  FeatureVector v{};
  std::size_t k = 0;
  const auto brightness = extract_brightness(gray);
  v[k++] = brightness.mean;
  v[k++] = brightness.entropy;
  for (double x : extract_rgb(resized)) v[k++] = x;
  for (double x : extract_hsv(resized)) v[k++] = x;
  const auto texture = glcm_features(glcm(gray, config.glcm_levels));
  v[k++] = texture.contrast;
  v[k++] = texture.correlation;
  v[k++] = texture.energy;
  v[k++] = texture.homogeneity;
  const auto lbp = lbp_features(gray);
  v[k++] = lbp.entropy;
  v[k++] = lbp.variance;
  const auto hog = hog_features(gray);
  v[k++] = hog.mean;
  v[k++] = hog.variance;
  v[k++] = hog.kurtosis;
  v[k++] = hog.skewness;
  v[k++] = hog.entropy;
  v[k++] = edgelen(gray, config.canny);
  const auto noise = noise_features(gray);
  v[k++] = noise.entropy;
  v[k++] = noise.snr;
  return v;
}

}  // namespace aiart
