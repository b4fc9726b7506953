#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "aiart/error.hpp"
#include "aiart/neural.hpp"
#include "aiart/rng.hpp"

namespace aiart {

Tensor::Tensor(std::vector<std::size_t> dims, double fill) : shape(std::move(dims)) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<std::size_t>());
  values.assign(count, fill);
}

std::string to_string(CnnArchitecture a) { return a == CnnArchitecture::binary11 ? "binary11" : "multiclass9"; }

CnnArchitecture parse_architecture(std::string_view text) {
  if (text == "binary11") return CnnArchitecture::binary11;
  if (text == "multiclass9") return CnnArchitecture::multiclass9;
  throw InvalidInput("unknown CNN architecture '" + std::string(text) + "' (binary11|multiclass9)");
}

std::string to_string(FinalActivation a) { return a == FinalActivation::sigmoid ? "sigmoid" : "softmax"; }

FinalActivation parse_final_activation(std::string_view text) {
  if (text == "sigmoid") return FinalActivation::sigmoid;
  if (text == "softmax") return FinalActivation::softmax;
  throw InvalidInput("unknown final activation '" + std::string(text) + "' (sigmoid|softmax)");
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::rescaling: return "Rescaling";
    case LayerKind::conv2d: return "Conv2D";
    case LayerKind::maxpool2d: return "MaxPooling2D";
    case LayerKind::dropout: return "Dropout";
    case LayerKind::flatten: return "Flatten";
    case LayerKind::dense: return "Dense";
  }
  return "?";
}

std::size_t CNNModel::num_classes() const {
  if (config.num_classes > 0) return static_cast<std::size_t>(config.num_classes);
  return config.architecture == CnnArchitecture::binary11 ? 2 : 6;
}

std::size_t CNNModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

CNNModel build_cnn(const CNNConfig& config) {
  if (config.input_side <= 0 || config.channels <= 0) throw ShapeError("CNN input dimensions must be positive");
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) throw InvalidInput("dropout rate must be in [0, 1)");
  if (config.l2_weight < 0.0) throw InvalidInput("L2 weight must be non-negative");
  if (config.dense_units <= 0) throw InvalidInput("dense width must be positive");
  const bool binary = config.architecture == CnnArchitecture::binary11;
  std::vector<int> filters = config.filters;
  if (filters.empty()) filters = binary ? std::vector<int>{16, 32, 64} : std::vector<int>{16, 32};
  if (filters.size() != (binary ? 3u : 2u))
    throw InvalidInput("architecture " + to_string(config.architecture) + " needs " + (binary ? "3" : "2") +
                       " filter counts");

  CNNModel model;
  model.config = config;
  const std::size_t classes = model.num_classes();
  if (classes < 2) throw InvalidInput("CNN needs at least two classes");
  const std::size_t out_units = (classes == 2 && config.final_activation == FinalActivation::sigmoid) ? 1 : classes;
  const bool l2 = !binary;

  std::size_t c = static_cast<std::size_t>(config.channels), h = static_cast<std::size_t>(config.input_side),
              w = h;
  auto push = [&](CnnLayer layer) {
    layer.in_c = c;
    layer.in_h = h;
    layer.in_w = w;
    switch (layer.kind) {
      case LayerKind::conv2d:
        if (h < 3 || w < 3)
          throw ShapeError("input side " + std::to_string(config.input_side) + " is too small for the " +
                           to_string(config.architecture) + " layer chain");
        h -= 2;
        w -= 2;
        break;
      case LayerKind::maxpool2d:
        if (h < 2 || w < 2)
          throw ShapeError("input side " + std::to_string(config.input_side) + " is too small for the " +
                           to_string(config.architecture) + " layer chain");
        h /= 2;
        w /= 2;
        break;
      case LayerKind::flatten:
        c = c * h * w;
        h = w = 1;
        break;
      case LayerKind::dense: break;
      default: break;
    }
    if (layer.kind == LayerKind::conv2d || layer.kind == LayerKind::dense) c = layer.out_c;
    layer.out_c = c;
    layer.out_h = h;
    layer.out_w = w;
    model.layers.push_back(std::move(layer));
  };

  auto make = [](LayerKind kind, std::size_t units = 0, bool relu = false, bool penalized = false) {
    CnnLayer layer;
    layer.kind = kind;
    layer.out_c = units;
    layer.relu = relu;
    layer.l2 = penalized;
    return layer;
  };
  push(make(LayerKind::rescaling));
  for (int f : filters) {
    if (f <= 0) throw InvalidInput("filter counts must be positive");
    push(make(LayerKind::conv2d, static_cast<std::size_t>(f), true, l2));
    push(make(LayerKind::maxpool2d));
  }
  push(make(LayerKind::dropout));
  push(make(LayerKind::flatten));
  push(make(LayerKind::dense, static_cast<std::size_t>(config.dense_units), true, l2));
  push(make(LayerKind::dense, out_units));

  Rng rng(config.seed);
  for (auto& layer : model.layers) {
    double fan_in = 0, fan_out = 0;
    if (layer.kind == LayerKind::conv2d) {
      layer.weights.resize(layer.out_c * layer.in_c * 9);
      fan_in = static_cast<double>(layer.in_c * 9);
      fan_out = static_cast<double>(layer.out_c * 9);
    } else if (layer.kind == LayerKind::dense) {
      layer.weights.resize(layer.out_c * layer.in_c);
      fan_in = static_cast<double>(layer.in_c);
      fan_out = static_cast<double>(layer.out_c);
    } else {
      continue;
    }
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : layer.weights) v = rng.uniform(-bound, bound);
    layer.bias.assign(layer.out_c, 0.0);
  }
  return model;
}

std::vector<double> flatten_parameters(const CNNModel& model) {
  std::vector<double> out;
  out.reserve(model.parameter_count());
  for (const auto& l : model.layers) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void assign_parameters(CNNModel& model, std::span<const double> params) {
  std::size_t k = 0;
  for (auto& l : model.layers) {
    for (auto& v : l.weights) v = params[k++];
    for (auto& v : l.bias) v = params[k++];
  }
  if (k != params.size()) throw ShapeError("CNN parameter vector has the wrong length");
}

Tensor image_tensor(const RasterImage& image, int side) {
  const RasterImage resized = resize_bilinear(image, side);
  const auto s = static_cast<std::size_t>(side);
  Tensor t({3, s, s});
  const auto plane = s * s;
  const auto pixels = resized.pixels();
  for (std::size_t i = 0; i < plane; ++i) {
    t.values[i] = pixels[i].r;
    t.values[plane + i] = pixels[i].g;
    t.values[2 * plane + i] = pixels[i].b;
  }
  return t;
}

namespace {

struct Trace {
  std::vector<std::vector<double>> values;           // values[l] = input of layer l; back() = logits
  std::vector<std::vector<std::uint32_t>> argmax;    // per pooling layer
  std::vector<std::vector<double>> masks;            // per dropout layer (scaled keep mask)
};

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  return seed ^ ((static_cast<std::uint64_t>(index) + 1) * 0x9E3779B97F4A7C15ULL);
}

void forward(const CNNModel& model, const Tensor& input, const std::uint64_t* dropout_seed, Trace& trace) {
  const auto& first = model.layers.front();
  if (input.size() != first.in_c * first.in_h * first.in_w)
    throw ShapeError("CNN input has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(first.in_c * first.in_h * first.in_w));
  const std::size_t L = model.layers.size();
  trace.values.resize(L + 1);
  trace.argmax.resize(L);
  trace.masks.resize(L);
  trace.values[0] = input.values;
  std::optional<Rng> rng;
  if (dropout_seed) rng.emplace(*dropout_seed);

  for (std::size_t li = 0; li < L; ++li) {
    const auto& layer = model.layers[li];
    const auto& in = trace.values[li];
    auto& out = trace.values[li + 1];
    switch (layer.kind) {
      case LayerKind::rescaling:
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * (1.0 / 255.0);
        break;
      case LayerKind::conv2d: {
        const std::size_t C = layer.in_c, H = layer.in_h, W = layer.in_w, F = layer.out_c, OH = layer.out_h,
                          OW = layer.out_w;
        out.assign(F * OH * OW, 0.0);
        for (std::size_t f = 0; f < F; ++f) {
          double* o = &out[f * OH * OW];
          std::fill(o, o + OH * OW, layer.bias[f]);
          for (std::size_t c = 0; c < C; ++c) {
            const double* src = &in[c * H * W];
            const double* k = &layer.weights[(f * C + c) * 9];
            for (std::size_t ky = 0; ky < 3; ++ky)
              for (std::size_t kx = 0; kx < 3; ++kx) {
                const double wv = k[ky * 3 + kx];
                for (std::size_t y = 0; y < OH; ++y) {
                  const double* s = src + (y + ky) * W + kx;
                  double* d = o + y * OW;
                  for (std::size_t x = 0; x < OW; ++x) d[x] += wv * s[x];
                }
              }
          }
        }
        if (layer.relu)
          for (auto& v : out) v = std::max(v, 0.0);
        break;
      }
      case LayerKind::maxpool2d: {
        const std::size_t C = layer.in_c, H = layer.in_h, W = layer.in_w, OH = layer.out_h, OW = layer.out_w;
        (void)H;
        out.resize(C * OH * OW);
        auto& arg = trace.argmax[li];
        arg.resize(out.size());
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t y = 0; y < OH; ++y)
            for (std::size_t x = 0; x < OW; ++x) {
              std::size_t best = c * layer.in_h * W + (2 * y) * W + 2 * x;
              for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx) {
                  const std::size_t idx = c * layer.in_h * W + (2 * y + dy) * W + 2 * x + dx;
                  if (in[idx] > in[best]) best = idx;
                }
              const std::size_t o = (c * OH + y) * OW + x;
              out[o] = in[best];
              arg[o] = static_cast<std::uint32_t>(best);
            }
        break;
      }
      case LayerKind::dropout: {
        out = in;
        const double rate = model.config.dropout_rate;
        if (rng && rate > 0.0) {
          auto& mask = trace.masks[li];
          mask.resize(in.size());
          const double keep_scale = 1.0 / (1.0 - rate);
          for (std::size_t i = 0; i < in.size(); ++i) {
            mask[i] = rng->uniform() < rate ? 0.0 : keep_scale;
            out[i] *= mask[i];
          }
        } else {
          trace.masks[li].clear();
        }
        break;
      }
      case LayerKind::flatten: out = in; break;
      case LayerKind::dense: {
        const std::size_t I = layer.in_c, O = layer.out_c;
        out.resize(O);
        for (std::size_t u = 0; u < O; ++u) {
          const double* w = &layer.weights[u * I];
          double acc = layer.bias[u];
          for (std::size_t j = 0; j < I; ++j) acc += w[j] * in[j];
          out[u] = layer.relu ? std::max(acc, 0.0) : acc;
        }
        break;
      }
    }
  }
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Loss of one sample and dLoss/dLogits.
double head_loss(const CNNModel& model, std::span<const double> z, int label, std::vector<double>& dz) {
  const std::size_t K = z.size();
  dz.assign(K, 0.0);
  const auto t = static_cast<std::size_t>(label);
  if (K == 1) {
    const double target = label == 1 ? 1.0 : 0.0;
    dz[0] = sigmoid(z[0]) - target;
    return softplus(z[0]) - target * z[0];
  }
  if (model.config.final_activation == FinalActivation::softmax) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    for (std::size_t k = 0; k < K; ++k) dz[k] = std::exp(z[k] - lse) - (k == t ? 1.0 : 0.0);
    return lse - z[t];
  }
  // Sigmoid units scored with categorical cross-entropy: the outputs are
  // renormalized to sum to one before taking -log p[label].
  double total = 0.0;
  std::vector<double> s(K);
  for (std::size_t k = 0; k < K; ++k) total += (s[k] = sigmoid(z[k]));
  for (std::size_t k = 0; k < K; ++k) dz[k] = s[k] * (1.0 - s[k]) / total - (k == t ? 1.0 - s[k] : 0.0);
  return softplus(-z[t]) + std::log(total);
}

int predicted_label(std::span<const double> z) {
  if (z.size() == 1) return z[0] > 0.0 ? 1 : 0;
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

void backward(const CNNModel& model, const Trace& trace, std::vector<double> grad_out, std::span<double> gradient,
              std::span<const std::size_t> offsets) {
  std::vector<double> grad_in;
  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const auto& layer = model.layers[li];
    const auto& in = trace.values[li];
    const auto& out = trace.values[li + 1];
    switch (layer.kind) {
      case LayerKind::rescaling: return;  // nothing upstream needs a gradient
      case LayerKind::conv2d: {
        const std::size_t C = layer.in_c, H = layer.in_h, W = layer.in_w, F = layer.out_c, OH = layer.out_h,
                          OW = layer.out_w;
        if (layer.relu)
          for (std::size_t i = 0; i < grad_out.size(); ++i)
            if (out[i] <= 0.0) grad_out[i] = 0.0;
        double* gw = gradient.data() + offsets[li];
        double* gb = gw + layer.weights.size();
        const bool need_input = li > 1;
        grad_in.assign(need_input ? C * H * W : 0, 0.0);
        for (std::size_t f = 0; f < F; ++f) {
          const double* g = &grad_out[f * OH * OW];
          double bsum = 0.0;
          for (std::size_t i = 0; i < OH * OW; ++i) bsum += g[i];
          gb[f] += bsum;
          for (std::size_t c = 0; c < C; ++c) {
            const double* src = &in[c * H * W];
            double* kgrad = gw + (f * C + c) * 9;
            const double* k = &layer.weights[(f * C + c) * 9];
            for (std::size_t ky = 0; ky < 3; ++ky)
              for (std::size_t kx = 0; kx < 3; ++kx) {
                double acc = 0.0;
                const double wv = k[ky * 3 + kx];
                for (std::size_t y = 0; y < OH; ++y) {
                  const double* s = src + (y + ky) * W + kx;
                  const double* gr = g + y * OW;
                  for (std::size_t x = 0; x < OW; ++x) acc += gr[x] * s[x];
                  if (need_input) {
                    double* d = &grad_in[c * H * W + (y + ky) * W + kx];
                    for (std::size_t x = 0; x < OW; ++x) d[x] += wv * gr[x];
                  }
                }
                kgrad[ky * 3 + kx] += acc;
              }
          }
        }
        if (!need_input) return;
        break;
      }
      case LayerKind::maxpool2d: {
        grad_in.assign(in.size(), 0.0);
        const auto& arg = trace.argmax[li];
        for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in[arg[o]] += grad_out[o];
        break;
      }
      case LayerKind::dropout: {
        grad_in = grad_out;
        const auto& mask = trace.masks[li];
        if (!mask.empty())
          for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] *= mask[i];
        break;
      }
      case LayerKind::flatten: grad_in = grad_out; break;
      case LayerKind::dense: {
        const std::size_t I = layer.in_c, O = layer.out_c;
        if (layer.relu)
          for (std::size_t u = 0; u < O; ++u)
            if (out[u] <= 0.0) grad_out[u] = 0.0;
        double* gw = gradient.data() + offsets[li];
        double* gb = gw + layer.weights.size();
        grad_in.assign(I, 0.0);
        for (std::size_t u = 0; u < O; ++u) {
          const double g = grad_out[u];
          if (g == 0.0) continue;
          gb[u] += g;
          double* row = gw + u * I;
          const double* w = &layer.weights[u * I];
          for (std::size_t j = 0; j < I; ++j) {
            row[j] += g * in[j];
            grad_in[j] += g * w[j];
          }
        }
        break;
      }
    }
    grad_out.swap(grad_in);
  }
}

std::vector<std::size_t> parameter_offsets(const CNNModel& model) {
  std::vector<std::size_t> offsets;
  std::size_t k = 0;
  for (const auto& l : model.layers) {
    offsets.push_back(k);
    k += l.weights.size() + l.bias.size();
  }
  return offsets;
}

struct BatchStats {
  double loss = 0.0;  // mean data loss + penalty
  std::size_t correct = 0;
};

BatchStats run_batch(const CNNModel& model, std::span<const Tensor> inputs, std::span<const int> labels,
                     bool training, std::uint64_t dropout_seed, std::vector<double>* gradient) {
  if (inputs.size() != labels.size() || inputs.empty()) throw ShapeError("CNN batch/label size mismatch");
  const auto offsets = parameter_offsets(model);
  if (gradient) gradient->assign(model.parameter_count(), 0.0);
  Trace trace;
  std::vector<double> dz;
  BatchStats stats;
  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::uint64_t seed = sample_seed(dropout_seed, i);
    forward(model, inputs[i], training ? &seed : nullptr, trace);
    const auto& logits = trace.values.back();
    stats.loss += head_loss(model, logits, labels[i], dz) * inv_n;
    if (predicted_label(logits) == labels[i]) ++stats.correct;
    if (gradient) {
      for (auto& v : dz) v *= inv_n;
      backward(model, trace, dz, *gradient, offsets);
    }
  }
  const double lambda = model.config.l2_weight;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const auto& layer = model.layers[li];
    if (!layer.l2 || lambda == 0.0) continue;
    for (std::size_t k = 0; k < layer.weights.size(); ++k) {
      stats.loss += lambda * layer.weights[k] * layer.weights[k];
      if (gradient) (*gradient)[offsets[li] + k] += 2.0 * lambda * layer.weights[k];
    }
  }
  return stats;
}

}  // namespace

std::vector<double> cnn_forward(const CNNModel& model, const Tensor& input, const std::uint64_t* dropout_seed) {
  Trace trace;
  forward(model, input, dropout_seed, trace);
  return trace.values.back();
}

double cnn_loss(const CNNModel& model, std::span<const Tensor> inputs, std::span<const int> labels, bool training,
                std::uint64_t dropout_seed, std::vector<double>* gradient) {
  return run_batch(model, inputs, labels, training, dropout_seed, gradient).loss;
}

CNNModel train_cnn(std::span<const Tensor> images, std::span<const int> labels, const SplitIndex& split,
                   const CNNConfig& config, std::vector<EpochMetrics>* log) {
  if (images.size() != labels.size()) throw ShapeError("image/label count mismatch");
  if (split.train.empty()) throw InvalidInput("CNN training split is empty");
  if (config.epochs < 1 || config.batch_size < 1) throw InvalidInput("CNN epochs and batch size must be positive");
  CNNModel model = build_cnn(config);
  const std::size_t classes = model.num_classes();
  for (int label : labels)
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      throw LabelError("label " + std::to_string(label) + " outside the model's " + std::to_string(classes) +
                       " classes");

  auto params = flatten_parameters(model);
  Adam adam(params.size(), config.learning_rate);
  Rng rng(config.seed ^ 0xC0FFEEULL);
  std::vector<std::size_t> order = split.train;
  std::vector<double> gradient;
  std::vector<Tensor> batch_x;
  std::vector<int> batch_y;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  auto gather_batch = [&](std::span<const std::size_t> idx) {
    batch_x.clear();
    batch_y.clear();
    for (auto i : idx) {
      batch_x.push_back(images[i]);
      batch_y.push_back(labels[i]);
    }
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      const std::size_t stop = std::min(order.size(), start + batch);
      gather_batch(std::span(order).subspan(start, stop - start));
      const std::uint64_t dropout_seed = rng.next();
      const auto stats = run_batch(model, batch_x, batch_y, true, dropout_seed, &gradient);
      loss_sum += stats.loss * static_cast<double>(stop - start);
      correct += stats.correct;
      adam.step(params, gradient);
      assign_parameters(model, params);
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!split.validation.empty()) {
      double val_loss = 0.0;
      std::size_t val_correct = 0;
      for (std::size_t start = 0; start < split.validation.size(); start += batch) {
        const std::size_t stop = std::min(split.validation.size(), start + batch);
        gather_batch(std::span(split.validation).subspan(start, stop - start));
        const auto stats = run_batch(model, batch_x, batch_y, false, 0, nullptr);
        val_loss += stats.loss * static_cast<double>(stop - start);
        val_correct += stats.correct;
      }
      m.val_loss = val_loss / static_cast<double>(split.validation.size());
      m.val_acc = static_cast<double>(val_correct) / static_cast<double>(split.validation.size());
    }
    if (log) log->push_back(m);
  }
  return model;
}

double cnn_l2_penalty(const CNNModel& model) {
  double total = 0.0;
  for (const auto& layer : model.layers)
    if (layer.l2)
      for (double w : layer.weights) total += w * w;
  return model.config.l2_weight * total;
}

Prediction predict_cnn(const CNNModel& model, std::span<const Tensor> inputs) {
  const std::size_t classes = model.num_classes();
  Prediction out{std::vector<int>(inputs.size()), Matrix(inputs.size(), classes)};
  Trace trace;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    forward(model, inputs[i], nullptr, trace);
    const auto& z = trace.values.back();
    auto s = out.scores.row(i);
    if (z.size() == 1) {
      s[1] = sigmoid(z[0]);
      s[0] = 1.0 - s[1];
    } else if (model.config.final_activation == FinalActivation::softmax) {
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) sum += (s[k] = std::exp(z[k] - zmax));
      for (auto& v : s) v /= sum;
    } else {
      for (std::size_t k = 0; k < z.size(); ++k) s[k] = sigmoid(z[k]);
    }
    out.labels[i] = predicted_label(z);
  }
  return out;
}

}  // namespace aiart
