#include "aiart/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "aiart/error.hpp"

namespace aiart {

namespace {

void check_dimensions(int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
}

}  // namespace

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dimensions(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

RasterImage::RasterImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dimensions(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw ShapeError("pixel count does not match width x height");
}

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  check_dimensions(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dimensions(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * height)
    throw ShapeError("intensity count does not match width x height");
}

double GrayImage::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

std::size_t EdgeMap::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

RasterImage resize_bilinear(const RasterImage& image, int side) {
  return resize_bilinear(image, side, side);
}

RasterImage resize_bilinear(const RasterImage& image, int out_width, int out_height) {
  if (image.empty()) throw InvalidInput("resize of an empty image");
  check_dimensions(out_width, out_height);
  if (image.width() == out_width && image.height() == out_height) return image;

  const double sx = static_cast<double>(image.width()) / out_width;
  const double sy = static_cast<double>(image.height()) / out_height;
  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int out_size, int in_size, double scale) {
    std::vector<Tap> result(static_cast<std::size_t>(out_size));
    for (int o = 0; o < out_size; ++o) {
      const double src = std::clamp((o + 0.5) * scale - 0.5, 0.0, static_cast<double>(in_size - 1));
      const int i0 = static_cast<int>(std::floor(src));
      result[static_cast<std::size_t>(o)] = {i0, std::min(i0 + 1, in_size - 1), src - i0};
    }
    return result;
  };
  const auto xt = taps(out_width, image.width(), sx);
  const auto yt = taps(out_height, image.height(), sy);

  RasterImage out(out_width, out_height);
  auto blend = [](double a, double b, double c, double d, double fx, double fy) {
    const double top = a + (b - a) * fx;
    const double bottom = c + (d - c) * fx;
    const double v = top + (bottom - top) * fy;
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  };
  for (int y = 0; y < out_height; ++y) {
    const auto& ty = yt[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_width; ++x) {
      const auto& tx = xt[static_cast<std::size_t>(x)];
      const Rgb& p00 = image.at(tx.i0, ty.i0);
      const Rgb& p10 = image.at(tx.i1, ty.i0);
      const Rgb& p01 = image.at(tx.i0, ty.i1);
      const Rgb& p11 = image.at(tx.i1, ty.i1);
      out.at(x, y) = {blend(p00.r, p10.r, p01.r, p11.r, tx.frac, ty.frac),
                      blend(p00.g, p10.g, p01.g, p11.g, tx.frac, ty.frac),
                      blend(p00.b, p10.b, p01.b, p11.b, tx.frac, ty.frac)};
    }
  }
  return out;
}

GrayImage to_gray(const RasterImage& image) {
  GrayImage out(image.width(), image.height());
  auto dst = out.values();
  const auto src = image.pixels();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
  return out;
}

Hsv rgb_to_hsv(Rgb pixel) {
  const double r = pixel.r / 255.0, g = pixel.g / 255.0, b = pixel.b / 255.0;
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;
  Hsv out;
  out.v = max;
  out.s = max > 0.0 ? delta / max : 0.0;
  if (delta > 0.0) {
    double sector;
    if (max == r)
      sector = std::fmod((g - b) / delta, 6.0);
    else if (max == g)
      sector = (b - r) / delta + 2.0;
    else
      sector = (r - g) / delta + 4.0;
    if (sector < 0.0) sector += 6.0;
    out.h = sector / 6.0;
    if (out.h >= 1.0) out.h -= 1.0;
  }
  return out;
}

HsvImage to_hsv(const RasterImage& image) {
  HsvImage out{image.width(), image.height(), {}};
  out.pixels.reserve(image.pixels().size());
  for (const auto& p : image.pixels()) out.pixels.push_back(rgb_to_hsv(p));
  return out;
}

GrayImage median3(const GrayImage& image) {
  GrayImage out(image.width(), image.height());
  std::array<double, 9> window{};
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      std::size_t k = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) window[k++] = image.clamped(x + dx, y + dy);
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out.at(x, y) = window[4];
    }
  }
  return out;
}

namespace {

GrayImage gaussian5(const GrayImage& image, double sigma) {
  std::array<double, 5> kernel{};
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i) {
    kernel[static_cast<std::size_t>(i + 2)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[static_cast<std::size_t>(i + 2)];
  }
  for (auto& k : kernel) k /= sum;

  // Separable: horizontal then vertical pass, both edge-replicated.
  GrayImage tmp(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) acc += kernel[static_cast<std::size_t>(i + 2)] * image.clamped(x + i, y);
      tmp.at(x, y) = acc;
    }
  GrayImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      double acc = 0.0;
      for (int i = -2; i <= 2; ++i) acc += kernel[static_cast<std::size_t>(i + 2)] * tmp.clamped(x, y + i);
      out.at(x, y) = acc;
    }
  return out;
}

}  // namespace

EdgeMap canny(const GrayImage& image, const CannyParams& params) {
  if (params.low < 0.0 || params.low > params.high)
    throw InvalidInput("canny thresholds must satisfy 0 <= low <= high");
  const int w = image.width(), h = image.height();
  const GrayImage smooth = gaussian5(image, params.sigma);

  std::vector<double> gx(static_cast<std::size_t>(w) * h), gy(gx.size()), mag(gx.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto p = [&](int dx, int dy) { return smooth.clamped(x + dx, y + dy); };
      const double sx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const double sy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      const auto i = static_cast<std::size_t>(y) * w + x;
      gx[i] = sx;
      gy[i] = sy;
      mag[i] = std::hypot(sx, sy);
    }

  auto magnitude = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return mag[static_cast<std::size_t>(y) * w + x];
  };

  // 0 = suppressed, 1 = weak candidate, 2 = strong.
  std::vector<std::uint8_t> state(mag.size(), 0);
  const double tan22 = 0.41421356237309503;  // tan(22.5 deg)
  const double tan67 = 2.414213562373095;    // tan(67.5 deg)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      const double m = mag[i];
      if (m <= 0.0 || m < params.low) continue;
      const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
      double before, after;
      if (ay <= ax * tan22) {
        before = magnitude(x - 1, y);
        after = magnitude(x + 1, y);
      } else if (ay > ax * tan67) {
        before = magnitude(x, y - 1);
        after = magnitude(x, y + 1);
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        before = magnitude(x - 1, y - 1);
        after = magnitude(x + 1, y + 1);
      } else {
        before = magnitude(x + 1, y - 1);
        after = magnitude(x - 1, y + 1);
      }
      // Asymmetric comparison keeps exactly one pixel of a two-pixel plateau.
      if (m > before && m >= after) state[i] = m >= params.high ? 2 : 1;
    }

  EdgeMap edges{w, h, std::vector<std::uint8_t>(mag.size(), 0)};
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state[i] == 2) {
      edges.flags[i] = 1;
      frontier.push_back(i);
    }
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop_front();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const auto j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] != 0 && !edges.flags[j]) {
          edges.flags[j] = 1;
          frontier.push_back(j);
        }
      }
  }
  return edges;
}

}  // namespace aiart
