#include <algorithm>
#include <cmath>
#include <numeric>

#include "aiart/error.hpp"
#include "aiart/neural.hpp"
#include "aiart/rng.hpp"

namespace aiart {

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> gradient) {
  if (params.size() != m_.size() || gradient.size() != m_.size()) throw ShapeError("Adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::logistic: return "logistic";
    default: return "relu";
  }
}

Activation parse_activation(std::string_view text) {
  if (text == "identity") return Activation::identity;
  if (text == "logistic") return Activation::logistic;
  if (text == "relu") return Activation::relu;
  throw InvalidInput("unknown activation '" + std::string(text) + "' (identity|logistic|relu)");
}

namespace {

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void activate(Activation a, std::span<double> values) {
  switch (a) {
    case Activation::identity: break;
    case Activation::logistic:
      for (auto& v : values) v = logistic(v);
      break;
    case Activation::relu:
      for (auto& v : values) v = std::max(v, 0.0);
      break;
  }
}

// Derivative expressed through the activated value.
double activation_slope(Activation a, double activated) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::logistic: return activated * (1.0 - activated);
    default: return activated > 0.0 ? 1.0 : 0.0;
  }
}

// out = in * W^T + b  (in: n x k, W: m x k)
Matrix affine(const Matrix& in, const DenseLayer& layer) {
  const std::size_t n = in.rows(), m = layer.weights.rows(), k = layer.weights.cols();
  Matrix out(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    const auto a = in.row(r);
    auto o = out.row(r);
    for (std::size_t u = 0; u < m; ++u) {
      const auto w = layer.weights.row(u);
      double acc = layer.bias[u];
      for (std::size_t j = 0; j < k; ++j) acc += w[j] * a[j];
      o[u] = acc;
    }
  }
  return out;
}

std::vector<Matrix> forward_all(const MLPModel& model, const Matrix& x) {
  std::vector<Matrix> acts;
  acts.reserve(model.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Matrix z = affine(acts.back(), model.layers[l]);
    if (l + 1 < model.layers.size()) activate(model.activation, z.values());
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

MLPModel init_mlp(std::size_t width, std::size_t num_classes, const MLPConfig& config) {
  if (width == 0) throw ShapeError("MLP needs at least one input feature");
  if (config.hidden_layer_sizes.empty()) throw InvalidInput("MLP needs at least one hidden layer");
  MLPModel model;
  model.activation = config.activation;
  model.num_classes = num_classes;
  std::vector<std::size_t> sizes{width};
  for (int h : config.hidden_layer_sizes) {
    if (h <= 0) throw InvalidInput("hidden layer sizes must be positive");
    sizes.push_back(static_cast<std::size_t>(h));
  }
  sizes.push_back(num_classes == 2 ? 1 : num_classes);

  Rng rng(config.random_state);
  const double factor = config.activation == Activation::logistic ? 2.0 : 6.0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = std::sqrt(factor / static_cast<double>(sizes[l] + sizes[l + 1]));
    DenseLayer layer{Matrix(sizes[l + 1], sizes[l]), std::vector<double>(sizes[l + 1])};
    for (auto& w : layer.weights.values()) w = rng.uniform(-bound, bound);
    for (auto& b : layer.bias) b = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::vector<double> flatten_parameters(const MLPModel& model) {
  std::vector<double> out;
  for (const auto& layer : model.layers) {
    out.insert(out.end(), layer.weights.values().begin(), layer.weights.values().end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

void assign_parameters(MLPModel& model, std::span<const double> params) {
  std::size_t k = 0;
  for (auto& layer : model.layers) {
    for (auto& w : layer.weights.values()) w = params[k++];
    for (auto& b : layer.bias) b = params[k++];
  }
  if (k != params.size()) throw ShapeError("MLP parameter vector has the wrong length");
}

double mlp_loss(const MLPModel& model, const Matrix& x, std::span<const int> y, double alpha,
                std::vector<double>* gradient) {
  if (x.cols() != model.width()) throw ShapeError("MLP input width mismatch");
  if (x.rows() != y.size() || x.rows() == 0) throw ShapeError("MLP batch/label size mismatch");
  const auto acts = forward_all(model, x);
  const Matrix& logits = acts.back();
  const std::size_t n = x.rows(), units = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = 0.0;
  Matrix delta(n, units);  // dLoss/dLogits
  for (std::size_t r = 0; r < n; ++r) {
    const auto z = logits.row(r);
    if (units == 1) {
      const double t = y[r] == 1 ? 1.0 : 0.0;
      loss += softplus(z[0]) - t * z[0];
      delta(r, 0) = (logistic(z[0]) - t) * inv_n;
    } else {
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double v : z) sum += std::exp(v - zmax);
      const double lse = zmax + std::log(sum);
      loss += lse - z[static_cast<std::size_t>(y[r])];
      for (std::size_t k = 0; k < units; ++k)
        delta(r, k) = (std::exp(z[k] - lse) - (static_cast<int>(k) == y[r] ? 1.0 : 0.0)) * inv_n;
    }
  }
  loss *= inv_n;
  double penalty = 0.0;
  for (const auto& layer : model.layers)
    for (double w : layer.weights.values()) penalty += w * w;
  loss += 0.5 * alpha * penalty;
  if (!gradient) return loss;

  // Backward pass, collected per layer then laid out in flatten order.
  std::vector<std::vector<double>> grads(model.layers.size());
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    const Matrix& input = acts[l];
    const std::size_t out = layer.weights.rows(), in = layer.weights.cols();
    std::vector<double> g(out * in + out, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto d = delta.row(r);
      const auto a = input.row(r);
      for (std::size_t u = 0; u < out; ++u) {
        if (d[u] == 0.0) continue;
        double* gw = &g[u * in];
        for (std::size_t j = 0; j < in; ++j) gw[j] += d[u] * a[j];
        g[out * in + u] += d[u];
      }
    }
    const auto w = layer.weights.values();
    for (std::size_t i = 0; i < out * in; ++i) g[i] += alpha * w[i];
    grads[l] = std::move(g);
    if (l == 0) break;
    Matrix next(n, in, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto d = delta.row(r);
      auto nd = next.row(r);
      for (std::size_t u = 0; u < out; ++u) {
        if (d[u] == 0.0) continue;
        const auto wu = layer.weights.row(u);
        for (std::size_t j = 0; j < in; ++j) nd[j] += d[u] * wu[j];
      }
      const auto a = input.row(r);
      for (std::size_t j = 0; j < in; ++j) nd[j] *= activation_slope(model.activation, a[j]);
    }
    delta = std::move(next);
  }
  gradient->clear();
  for (auto& g : grads) gradient->insert(gradient->end(), g.begin(), g.end());
  return loss;
}

MLPModel train_mlp(const Matrix& x, std::span<const int> y, const MLPConfig& config, Task task) {
  if (x.rows() != y.size()) throw ShapeError("row count does not match label count");
  const std::size_t classes = check_labels(y, task);
  if (config.max_iter < 1) throw InvalidInput("MLP: max_iter must be positive");
  if (!(config.learning_rate_init > 0.0)) throw InvalidInput("MLP: learning_rate_init must be positive");
  MLPModel model = init_mlp(x.cols(), classes, config);

  const std::size_t n = x.rows();
  const std::size_t batch = config.batch_size > 0 ? std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n)
                                                   : std::min<std::size_t>(200, n);
  auto params = flatten_parameters(model);
  Adam adam(params.size(), config.learning_rate_init);
  Rng rng(config.random_state ^ 0x5eed5eed5eedULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gradient;
  std::vector<int> batch_y;

  for (int epoch = 0; epoch < config.max_iter; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix bx = x.select_rows(idx);
      batch_y.clear();
      for (auto i : idx) batch_y.push_back(y[i]);
      const double loss = mlp_loss(model, bx, batch_y, config.alpha, &gradient);
      epoch_loss += loss * static_cast<double>(idx.size());
      adam.step(params, gradient);
      assign_parameters(model, params);
    }
    model.loss_curve.push_back(epoch_loss / static_cast<double>(n));
  }
  return model;
}

Prediction predict_mlp(const MLPModel& model, const Matrix& x) {
  if (x.cols() != model.width())
    throw ShapeError("MLP expects " + std::to_string(model.width()) + " features, got " + std::to_string(x.cols()));
  const auto acts = forward_all(model, x);
  const Matrix& logits = acts.back();
  Prediction out{std::vector<int>(x.rows()), Matrix(x.rows(), model.num_classes)};
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto z = logits.row(r);
    auto s = out.scores.row(r);
    if (z.size() == 1) {
      s[1] = logistic(z[0]);
      s[0] = 1.0 - s[1];
    } else {
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) sum += (s[k] = std::exp(z[k] - zmax));
      for (auto& v : s) v /= sum;
    }
    out.labels[r] = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
  }
  return out;
}

}  // namespace aiart
