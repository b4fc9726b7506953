#pragma once

// Reference implementations written straight from the definitions. Shared by
// the unit tests and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "aiart/imaging.hpp"
#include "aiart/matrix.hpp"
#include "aiart/models.hpp"
#include "aiart/neural.hpp"
#include "aiart/rng.hpp"
#include "support.hpp"

namespace oracle {

using namespace aiart;

// Pair counting straight from the definition: every horizontally adjacent
// pair contributes to (a, b) and (b, a).
inline std::vector<double> naive_glcm(const GrayImage& g, int levels) {
  std::map<std::pair<int, int>, long> counts;
  long total = 0;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x + 1 < g.width(); ++x) {
      const int a = static_cast<int>(std::floor(g.at(x, y) * levels / 256.0));
      const int b = static_cast<int>(std::floor(g.at(x + 1, y) * levels / 256.0));
      ++counts[{a, b}];
      ++counts[{b, a}];
      total += 2;
    }
  std::vector<double> p(static_cast<std::size_t>(levels * levels), 0.0);
  for (const auto& [ij, n] : counts)
    p[static_cast<std::size_t>(ij.first * levels + ij.second)] = static_cast<double>(n) / static_cast<double>(total);
  return p;
}

inline std::uint8_t naive_lbp(const GrayImage& g, int x, int y) {
  // Clockwise from the top-left neighbour, which is the most significant bit.
  const int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  const int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  int code = 0;
  for (int k = 0; k < 8; ++k)
    if (g.at(x + dx[k], y + dy[k]) >= g.at(x, y)) code |= 1 << (7 - k);
  return static_cast<std::uint8_t>(code);
}

inline GrayImage checkerboard(int side) {
  GrayImage g(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) g.at(x, y) = (x + y) % 2 ? 255.0 : 0.0;
  return g;
}

/// Two-pass population moments in long double; kurtosis is excess.
struct Moments {
  long double mean = 0, variance = 0, skewness = 0, kurtosis = 0;
};

inline Moments naive_moments(std::span<const double> v) {
  long double sum = 0;
  for (double x : v) sum += x;
  Moments m;
  m.mean = sum / v.size();
  long double m2 = 0, m3 = 0, m4 = 0;
  for (double x : v) {
    const long double d = x - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= v.size();
  m3 /= v.size();
  m4 /= v.size();
  m.variance = m2;
  if (m2 > 0) {
    m.skewness = m3 / std::pow(m2, 1.5L);
    m.kurtosis = m4 / (m2 * m2) - 3;
  }
  return m;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix x(rows, cols);
  for (auto& v : x.values()) v = rng.normal();
  return x;
}

template <typename Loss>
std::vector<double> central_differences(std::vector<double> p, Loss&& loss, double h) {
  std::vector<double> g(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + h;
    const double up = loss(p);
    p[k] = keep - h;
    const double down = loss(p);
    p[k] = keep;
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

/// Q_ij = y_i y_j K(x_i, x_j)
inline Matrix signed_gram(const Matrix& x, std::span<const int> signs, Kernel kernel, double gamma) {
  Matrix q(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j)
      q(i, j) = signs[i] * signs[j] * kernel_value(kernel, gamma, x.row(i), x.row(j));
  return q;
}

inline double dual_objective(const Matrix& q, std::span<const double> alpha) {
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j) quad += alpha[i] * alpha[j] * q(i, j);
  }
  return linear - 0.5 * quad;
}

/// Best dual objective over `draws` random points of the feasible set.
inline double best_random_dual(Rng& rng, const Matrix& q, std::span<const int> signs, double c, int draws) {
  double best = -1e300;
  std::vector<double> a(signs.size());
  for (int draw = 0; draw < draws; ++draw) {
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform(0.0, c);
      (signs[i] > 0 ? pos : neg) += a[i];
    }
    // Shrink the heavier side so sum(a_i y_i) = 0 while staying in the box.
    const double scale_pos = pos > neg ? neg / pos : 1.0, scale_neg = neg > pos ? pos / neg : 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= signs[i] > 0 ? scale_pos : scale_neg;
    best = std::max(best, dual_objective(q, a));
  }
  return best;
}

inline std::vector<Tensor> random_images(Rng& rng, std::size_t count, std::size_t side) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < count; ++i) {
    Tensor t({3, side, side});
    for (auto& v : t.values) v = rng.uniform(0.0, 255.0);
    out.push_back(std::move(t));
  }
  return out;
}

inline double cnn_gradient_error(CNNConfig cfg, std::size_t side, std::span<const int> labels, std::uint64_t seed) {
  Rng rng(seed);
  cfg.input_side = static_cast<int>(side);
  CNNModel model = build_cnn(cfg);
  // Non-zero biases so every relu sees a mix of signs.
  auto params = flatten_parameters(model);
  for (auto& v : params) v += 0.05 * rng.normal();
  assign_parameters(model, params);
  const auto images = random_images(rng, labels.size(), side);
  std::vector<double> analytic;
  cnn_loss(model, images, labels, true, 99, &analytic);
  const auto numeric = central_differences(params, [&](const std::vector<double>& p) {
    CNNModel probe = model;
    assign_parameters(probe, p);
    return cnn_loss(probe, images, labels, true, 99);
  }, 1e-5);
  return testing::relative_error(analytic, numeric);
}

}  // namespace oracle
