#include <algorithm>
#include <cmath>
#include <set>

#include "aiart/error.hpp"
#include "aiart/models.hpp"

namespace aiart {

std::string to_string(Task task) { return task == Task::binary ? "binary" : "multiclass"; }

Task parse_task(std::string_view text) {
  if (text == "binary") return Task::binary;
  if (text == "multiclass") return Task::multiclass;
  throw InvalidInput("unknown task '" + std::string(text) + "' (binary|multiclass)");
}

std::size_t check_labels(std::span<const int> y, Task task) {
  if (y.empty()) throw InvalidInput("no training labels");
  std::set<int> distinct(y.begin(), y.end());
  if (*distinct.begin() < 0) throw InvalidInput("labels must be non-negative");
  if (task == Task::binary && *distinct.rbegin() > 1) throw InvalidInput("binary labels must be 0 or 1");
  if (distinct.size() < 2) throw DegenerateLabels("training labels contain a single class");
  return task == Task::binary ? 2 : static_cast<std::size_t>(*distinct.rbegin()) + 1;
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LogisticObjective::LogisticObjective(const Matrix& x, std::span<const int> y, std::size_t logits, double c)
    : x_(x), y_(y), logits_(logits), c_(c) {
  if (x.rows() != y.size()) throw ShapeError("row count does not match label count");
  if (!(c > 0.0)) throw InvalidInput("LR: C must be positive");
}

double LogisticObjective::value(std::span<const double> params) const {
  std::vector<double> scratch(parameter_count());
  return value_and_gradient(params, scratch);
}

double LogisticObjective::value_and_gradient(std::span<const double> params, std::span<double> gradient) const {
  const std::size_t d = x_.cols(), K = logits_;
  if (params.size() != parameter_count() || gradient.size() != parameter_count())
    throw ShapeError("LR parameter vector has the wrong length");
  const double* w = params.data();
  const double* b = params.data() + K * d;

  double penalty = 0.0;
  for (std::size_t i = 0; i < K * d; ++i) {
    penalty += w[i] * w[i];
    gradient[i] = w[i];
  }
  std::fill(gradient.begin() + static_cast<long>(K * d), gradient.end(), 0.0);

  double loss = 0.0;
  std::vector<double> z(K), residual(K);
  for (std::size_t r = 0; r < x_.rows(); ++r) {
    const auto row = x_.row(r);
    for (std::size_t k = 0; k < K; ++k) {
      double acc = b[k];
      const double* wk = w + k * d;
      for (std::size_t j = 0; j < d; ++j) acc += wk[j] * row[j];
      z[k] = acc;
    }
    const int label = y_[r];
    if (K == 1) {
      loss += softplus(z[0]) - (label == 1 ? z[0] : 0.0);
      residual[0] = sigmoid(z[0]) - (label == 1 ? 1.0 : 0.0);
    } else {
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += std::exp(z[k] - zmax);
      const double lse = zmax + std::log(sum);
      loss += lse - z[static_cast<std::size_t>(label)];
      for (std::size_t k = 0; k < K; ++k)
        residual[k] = std::exp(z[k] - lse) - (static_cast<int>(k) == label ? 1.0 : 0.0);
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double g = c_ * residual[k];
      double* gk = gradient.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) gk[j] += g * row[j];
      gradient[K * d + k] += g;
    }
  }
  return 0.5 * penalty + c_ * loss;
}

std::vector<double> LogisticObjective::curvature_bound() const {
  const std::size_t d = x_.cols(), K = logits_;
  std::vector<double> column_sq(d, 0.0);
  for (std::size_t r = 0; r < x_.rows(); ++r)
    for (std::size_t j = 0; j < d; ++j) column_sq[j] += x_(r, j) * x_(r, j);
  // p(1-p) <= 1/4 for both the logistic and the softmax diagonal.
  std::vector<double> bound(parameter_count());
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < d; ++j) bound[k * d + j] = 1.0 + 0.25 * c_ * column_sq[j];
    bound[K * d + k] = std::max(0.25 * c_ * static_cast<double>(x_.rows()), 1e-300);
  }
  return bound;
}

LRModel train_lr(const Matrix& x, std::span<const int> y, const LRConfig& config, Task task) {
  const std::size_t classes = check_labels(y, task);
  if (config.max_iter < 1) throw InvalidInput("LR: max_iter must be positive");
  const std::size_t logits = task == Task::binary ? 1 : classes;
  const LogisticObjective objective(x, y, logits, config.c);
  const auto bound = objective.curvature_bound();

  const std::size_t P = objective.parameter_count();
  std::vector<double> params(P, 0.0), gradient(P), direction(P), trial(P), trial_gradient(P);
  double f = objective.value_and_gradient(params, gradient);

  LRModel model;
  model.num_classes = classes;
  model.objective_trace.push_back(f);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    double scaled_norm = 0.0, slope = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      direction[i] = -gradient[i] / bound[i];
      scaled_norm = std::max(scaled_norm, std::abs(direction[i]));
      slope += gradient[i] * direction[i];
    }
    if (scaled_norm < config.tolerance) {
      model.converged = true;
      break;
    }
    double step = 1.0, f_trial = 0.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      for (std::size_t i = 0; i < P; ++i) trial[i] = params[i] + step * direction[i];
      f_trial = objective.value_and_gradient(trial, trial_gradient);
      if (f_trial <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease left along the descent direction.
      model.converged = true;
      break;
    }
    params.swap(trial);
    gradient.swap(trial_gradient);
    f = f_trial;
    model.objective_trace.push_back(f);
    model.iterations = iter + 1;
  }

  const std::size_t d = x.cols();
  model.weights = Matrix(logits, d, std::vector<double>(params.begin(), params.begin() + static_cast<long>(logits * d)));
  model.biases.assign(params.begin() + static_cast<long>(logits * d), params.end());
  return model;
}

LRPrediction predict_lr(const LRModel& model, const Matrix& x) {
  if (x.cols() != model.width())
    throw ShapeError("LR model expects " + std::to_string(model.width()) + " features, got " +
                     std::to_string(x.cols()));
  const std::size_t K = model.num_classes, logits = model.weights.rows();
  LRPrediction out{std::vector<int>(x.rows()), Matrix(x.rows(), K)};
  std::vector<double> z(logits);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t k = 0; k < logits; ++k) {
      double acc = model.biases[k];
      const auto wk = model.weights.row(k);
      for (std::size_t j = 0; j < row.size(); ++j) acc += wk[j] * row[j];
      z[k] = acc;
    }
    auto probs = out.probabilities.row(r);
    if (logits == 1) {
      probs[1] = sigmoid(z[0]);
      probs[0] = 1.0 - probs[1];
    } else {
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += (probs[k] = std::exp(z[k] - zmax));
      for (auto& p : probs) p /= sum;
    }
    out.labels[r] = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  return out;
}

}  // namespace aiart
