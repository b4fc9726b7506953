#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aiart {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});
  RasterImage(int width, int height, std::vector<Rgb> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const Rgb> pixels() const { return pixels_; }
  std::span<Rgb> pixels() { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

/// Grayscale intensities in [0, 255], row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }

  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  /// Edge-replicating read.
  double clamped(int x, int y) const;
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;
};

struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<Hsv> pixels;
};

/// Binary edge flags with the source image's dimensions.
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> flags;

  bool at(int x, int y) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

struct CannyParams {
  double low = 50.0;
  double high = 150.0;
  double sigma = 1.4;
};

// Codec. Decoding accepts PNG and JPEG streams; alpha is composited over white.
RasterImage decode(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
RasterImage decode_file(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const RasterImage& image);
std::vector<std::uint8_t> encode_jpeg(const RasterImage& image, int quality = 95, bool grayscale = false);
bool has_image_extension(const std::filesystem::path& path);

/// Square output of the given side; pixel-center aligned bilinear sampling with
/// edge clamping. Same-size input is returned unchanged.
RasterImage resize_bilinear(const RasterImage& image, int side = 255);
RasterImage resize_bilinear(const RasterImage& image, int out_width, int out_height);

/// BT.601 luma: 0.299 r + 0.587 g + 0.114 b.
GrayImage to_gray(const RasterImage& image);

/// Hexcone HSV with every channel in [0, 1]; achromatic pixels get hue 0.
Hsv rgb_to_hsv(Rgb pixel);
HsvImage to_hsv(const RasterImage& image);

/// 3x3 median with edge replication.
GrayImage median3(const GrayImage& image);

/// Gaussian (5x5) -> Sobel -> non-maximum suppression -> double threshold ->
/// 8-connected hysteresis. Thresholds apply to the L2 Sobel magnitude.
EdgeMap canny(const GrayImage& image, const CannyParams& params = {});

}  // namespace aiart
