#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "aiart/error.hpp"
#include "aiart/models.hpp"
#include "aiart/textio.hpp"

namespace aiart {

std::string to_string(Kernel kernel) { return kernel == Kernel::linear ? "linear" : "rbf"; }

Kernel parse_kernel(std::string_view text) {
  if (text == "linear") return Kernel::linear;
  if (text == "rbf") return Kernel::rbf;
  throw InvalidInput("unknown kernel '" + std::string(text) + "' (linear|rbf)");
}

Gamma Gamma::parse(std::string_view text) {
  if (text == "scale") return {Kind::scale, 0.0};
  if (text == "auto") return {Kind::automatic, 0.0};
  const double v = parse_double(text);
  if (!(v > 0.0)) throw InvalidInput("gamma must be positive");
  return {Kind::value, v};
}

std::string Gamma::str() const {
  switch (kind) {
    case Kind::scale: return "scale";
    case Kind::automatic: return "auto";
    default: return format_double(value);
  }
}

double Gamma::resolve(const Matrix& x) const {
  const auto d = static_cast<double>(x.cols());
  switch (kind) {
    case Kind::value: return value;
    case Kind::automatic: return 1.0 / d;
    case Kind::scale: {
      const auto values = x.values();
      const auto n = static_cast<double>(values.size());
      const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      var /= n;
      return var > 0.0 ? 1.0 / (d * var) : 1.0;
    }
  }
  return 1.0;
}

double kernel_value(Kernel kernel, double gamma, std::span<const double> a, std::span<const double> b) {
  if (kernel == Kernel::linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    dist += diff * diff;
  }
  return std::exp(-gamma * dist);
}

namespace {

/// Lazily computed kernel rows with a coarse memory cap.
class KernelRows {
 public:
  KernelRows(const Matrix& x, Kernel kernel, double gamma)
      : x_(x), kernel_(kernel), gamma_(gamma), diag_(x.rows()) {
    for (std::size_t i = 0; i < x.rows(); ++i) diag_[i] = kernel_value(kernel, gamma, x.row(i), x.row(i));
    max_rows_ = std::max<std::size_t>(2, (std::size_t{256} << 20) / (sizeof(double) * std::max<std::size_t>(x.rows(), 1)));
  }

  const std::vector<double>& row(std::size_t i) {
    auto it = rows_.find(i);
    if (it != rows_.end()) return it->second;
    if (rows_.size() >= max_rows_) rows_.clear();
    std::vector<double> values(x_.rows());
    for (std::size_t j = 0; j < x_.rows(); ++j) values[j] = kernel_value(kernel_, gamma_, x_.row(i), x_.row(j));
    return rows_.emplace(i, std::move(values)).first->second;
  }

  double diag(std::size_t i) const { return diag_[i]; }

 private:
  const Matrix& x_;
  Kernel kernel_;
  double gamma_;
  std::vector<double> diag_;
  std::size_t max_rows_;
  std::unordered_map<std::size_t, std::vector<double>> rows_;
};

constexpr double kTau = 1e-12;

}  // namespace

SmoResult solve_smo(const Matrix& x, std::span<const int> signs, Kernel kernel, double gamma, double c,
                    double tolerance, std::size_t max_updates) {
  const std::size_t n = x.rows();
  if (signs.size() != n) throw ShapeError("SMO: label count does not match rows");
  if (!(c > 0.0)) throw InvalidInput("SVM: C must be positive");
  KernelRows K(x, kernel, gamma);
  std::vector<double> y(n), alpha(n, 0.0), grad(n, -1.0);  // grad of (1/2)a'Qa - e'a
  for (std::size_t i = 0; i < n; ++i) y[i] = signs[i] > 0 ? 1.0 : -1.0;

  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

  SmoResult result;
  while (result.iterations < max_updates) {
    // i: maximal violator in I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * grad[t] >= gmax) {
        if (-y[t] * grad[t] > gmax || i == n) i = t;
        gmax = -y[t] * grad[t];
      }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_gain = std::numeric_limits<double>::infinity();
    const std::vector<double>* Ki = i < n ? &K.row(i) : nullptr;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * grad[t]);
      if (!Ki) continue;
      const double b = gmax + y[t] * grad[t];
      if (b <= 0) continue;
      double a = K.diag(i) + K.diag(t) - 2.0 * (*Ki)[t];
      if (a <= 0) a = kTau;
      const double gain = -(b * b) / a;
      if (gain <= best_gain) {
        if (gain < best_gain || j == n) j = t;
        best_gain = gain;
      }
    }
    if (i == n || j == n || gmax + gmax2 < tolerance) {
      result.converged = true;
      break;
    }

    // Copies: fetching one row may evict the other.
    const std::vector<double> Kii = K.row(i);
    const std::vector<double> Kj = K.row(j);
    const double old_i = alpha[i], old_j = alpha[j];
    double quad = K.diag(i) + K.diag(j) - 2.0 * Kii[j];
    if (quad <= 0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else if (alpha[i] < 0) {
        alpha[i] = 0; alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else if (alpha[j] > c) {
        alpha[j] = c; alpha[i] = c + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else if (alpha[j] < 0) {
        alpha[j] = 0; alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else if (alpha[i] < 0) {
        alpha[i] = 0; alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    // Q_it = y_i y_t K_it
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * Kii[t] * di + y[j] * Kj[t] * dj);
    ++result.iterations;
  }

  // rho from free vectors, or the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity(), lower = -upper, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
  result.bias = -rho;
  result.alpha = std::move(alpha);
  return result;
}

double BinarySvm::decision(Kernel kernel, double gamma, std::span<const double> row) const {
  double f = bias;
  for (std::size_t i = 0; i < dual_coef.size(); ++i)
    f += dual_coef[i] * kernel_value(kernel, gamma, support_vectors.row(i), row);
  return f;
}

namespace {

BinarySvm train_pair(const Matrix& x, std::span<const int> y, int positive, int negative, const SVMConfig& config,
                     double gamma) {
  std::vector<std::size_t> rows;
  std::vector<int> signs;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == positive || y[i] == negative) {
      rows.push_back(i);
      signs.push_back(y[i] == positive ? 1 : -1);
    }
  }
  const Matrix sub = x.select_rows(rows);
  const std::size_t n = sub.rows();
  const auto budget = static_cast<std::size_t>(std::max(config.max_passes, 1)) * 10 * std::max<std::size_t>(n, 10000);
  auto smo = solve_smo(sub, signs, config.kernel, gamma, config.c, config.tolerance, budget);
  if (!smo.converged)
    std::cerr << "warning: SMO stopped after " << smo.iterations << " updates without reaching tolerance "
              << config.tolerance << "; using the last iterate\n";

  BinarySvm machine;
  machine.positive = positive;
  machine.negative = negative;
  machine.bias = smo.bias;
  machine.converged = smo.converged;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i)
    if (smo.alpha[i] > 0.0) {
      support.push_back(i);
      machine.dual_coef.push_back(smo.alpha[i] * signs[i]);
    }
  machine.support_vectors = sub.select_rows(support);
  if (support.empty()) machine.support_vectors = Matrix(0, x.cols());
  return machine;
}

}  // namespace

SVMModel train_svm(const Matrix& x, std::span<const int> y, const SVMConfig& config, Task task) {
  if (x.rows() != y.size()) throw ShapeError("row count does not match label count");
  const std::size_t classes = check_labels(y, task);
  SVMModel model;
  model.kernel = config.kernel;
  model.gamma = config.kernel == Kernel::rbf ? config.gamma.resolve(x) : 0.0;
  model.num_classes = classes;
  model.width = x.cols();
  if (task == Task::binary) {
    model.machines.push_back(train_pair(x, y, 1, 0, config, model.gamma));
    return model;
  }
  std::vector<bool> present(classes, false);
  for (int label : y) present[static_cast<std::size_t>(label)] = true;
  for (std::size_t a = 0; a < classes; ++a)
    for (std::size_t b = a + 1; b < classes; ++b)
      if (present[a] && present[b])
        model.machines.push_back(train_pair(x, y, static_cast<int>(a), static_cast<int>(b), config, model.gamma));
  return model;
}

namespace {

void check_width(const SVMModel& model, const Matrix& x) {
  if (x.cols() != model.width)
    throw ShapeError("SVM model expects " + std::to_string(model.width) + " features, got " +
                     std::to_string(x.cols()));
}

}  // namespace

std::vector<int> predict_svm(const SVMModel& model, const Matrix& x) {
  check_width(model, x);
  std::vector<int> labels(x.rows());
  std::vector<int> votes(model.num_classes);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& m : model.machines) {
      const double f = m.decision(model.kernel, model.gamma, x.row(r));
      const int winner = f > 0 ? m.positive : (f < 0 ? m.negative : std::min(m.positive, m.negative));
      ++votes[static_cast<std::size_t>(winner)];
    }
    labels[r] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return labels;
}

std::vector<double> svm_decision_values(const SVMModel& model, const Matrix& x) {
  check_width(model, x);
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = model.machines.front().decision(model.kernel, model.gamma, x.row(r));
  return out;
}

}  // namespace aiart
