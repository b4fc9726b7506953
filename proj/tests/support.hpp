#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "aiart/imaging.hpp"
#include "aiart/rng.hpp"
#include "aiart/textio.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aiart-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline aiart::GrayImage random_gray(aiart::Rng& rng, int w, int h) {
  aiart::GrayImage g(w, h);
  for (auto& v : g.values()) v = static_cast<double>(rng.below(256));
  return g;
}

inline aiart::RasterImage random_raster(aiart::Rng& rng, int w, int h) {
  aiart::RasterImage img(w, h);
  for (auto& p : img.pixels())
    p = {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
         static_cast<std::uint8_t>(rng.below(256))};
  return img;
}

/// Smooth two-colour linear ramp with a random direction.
inline aiart::RasterImage gradient_image(aiart::Rng& rng, int side) {
  const double angle = rng.uniform(0.0, 6.283185307179586);
  const double dx = std::cos(angle), dy = std::sin(angle);
  aiart::Rgb a{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
               static_cast<std::uint8_t>(rng.below(256))};
  aiart::Rgb b{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
               static_cast<std::uint8_t>(rng.below(256))};
  aiart::RasterImage img(side, side);
  const double half = side / 2.0;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      double t = ((x - half) * dx + (y - half) * dy) / side + 0.5;
      t = std::clamp(t, 0.0, 1.0);
      auto mix = [&](std::uint8_t p, std::uint8_t q) {
        return static_cast<std::uint8_t>(std::lround(p + (q - p) * t));
      };
      img.at(x, y) = {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
    }
  return img;
}

/// Independent per-pixel noise around a random base colour.
inline aiart::RasterImage noise_image(aiart::Rng& rng, int side) {
  aiart::RasterImage img(side, side);
  const double base = rng.uniform(60.0, 190.0);
  for (auto& p : img.pixels()) {
    auto channel = [&] {
      return static_cast<std::uint8_t>(std::clamp(std::lround(base + 60.0 * rng.normal()), 0L, 255L));
    };
    p = {channel(), channel(), channel()};
  }
  return img;
}

inline void write_png(const std::filesystem::path& path, const aiart::RasterImage& image) {
  const auto bytes = aiart::encode_png(image);
  aiart::write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

/// root/<class>/imgN.png; "AI-" classes get noise textures, the rest smooth
/// gradients, so the binary task is easy.
inline void write_toy_tree(const std::filesystem::path& root, const std::vector<std::string>& classes, int per_class,
                           std::uint64_t seed, int side = 32) {
  aiart::Rng rng(seed);
  for (const auto& c : classes) {
    const bool ai = c.rfind("AI-", 0) == 0;
    for (int i = 0; i < per_class; ++i)
      write_png(root / c / ("img" + std::to_string(i) + ".png"), ai ? noise_image(rng, side) : gradient_image(rng, side));
  }
}

/// Relative error ||a - b|| / (||a|| + ||b||), 0 when both vanish.
template <typename A, typename B>
double relative_error(const A& a, const B& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

}  // namespace testing
