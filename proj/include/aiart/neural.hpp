#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aiart/dataset.hpp"
#include "aiart/imaging.hpp"
#include "aiart/matrix.hpp"
#include "aiart/models.hpp"

namespace aiart {

/// Adam with bias correction; one instance per parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t size, double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void step(std::span<double> params, std::span<const double> gradient);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

// ---------------------------------------------------------------------------
// Multilayer perceptron

enum class Activation { identity, logistic, relu };
std::string to_string(Activation a);
Activation parse_activation(std::string_view text);

struct MLPConfig {
  std::vector<int> hidden_layer_sizes{100};
  Activation activation = Activation::relu;
  double alpha = 1e-4;  // L2 weight on every weight matrix (biases excluded)
  double learning_rate_init = 1e-3;
  int max_iter = 200;   // epochs
  std::uint64_t random_state = 0;
  int batch_size = 0;   // 0 -> min(200, n)
};

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
};

/// Binary models end in one logistic unit; multiclass models in a softmax.
struct MLPModel {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::relu;
  std::size_t num_classes = 2;
  std::vector<double> loss_curve;

  std::size_t width() const { return layers.empty() ? 0 : layers.front().weights.cols(); }
  std::size_t output_units() const { return layers.back().weights.rows(); }
};

MLPModel init_mlp(std::size_t width, std::size_t num_classes, const MLPConfig& config);
std::vector<double> flatten_parameters(const MLPModel& model);
void assign_parameters(MLPModel& model, std::span<const double> params);

/// Mean cross-entropy over the rows plus (alpha/2) * sum ||W||^2. When
/// `gradient` is non-null it receives dLoss/dParams in flatten order.
double mlp_loss(const MLPModel& model, const Matrix& x, std::span<const int> y, double alpha,
                std::vector<double>* gradient = nullptr);

MLPModel train_mlp(const Matrix& x, std::span<const int> y, const MLPConfig& config, Task task);

struct Prediction {
  std::vector<int> labels;
  Matrix scores;  // rows x classes
};

Prediction predict_mlp(const MLPModel& model, const Matrix& x);

// ---------------------------------------------------------------------------
// Convolutional network

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
  std::size_t size() const { return values.size(); }
};

enum class CnnArchitecture { binary11, multiclass9 };
enum class FinalActivation { sigmoid, softmax };
std::string to_string(CnnArchitecture a);
CnnArchitecture parse_architecture(std::string_view text);
std::string to_string(FinalActivation a);
FinalActivation parse_final_activation(std::string_view text);

struct CNNConfig {
  int input_side = 64;
  int channels = 3;
  CnnArchitecture architecture = CnnArchitecture::binary11;
  double dropout_rate = 0.1;
  double l2_weight = 1e-3;  // Keras convention: penalty = l2_weight * sum w^2
  FinalActivation final_activation = FinalActivation::sigmoid;
  double learning_rate = 0.001;
  int epochs = 4;
  std::uint64_t seed = 0;
  int batch_size = 32;
  std::vector<int> filters;  // empty -> 16/32/64 (binary11) or 16/32 (multiclass9)
  int dense_units = 128;
  int num_classes = 0;       // 0 -> 2 (binary11) or 6 (multiclass9)
};

enum class LayerKind { rescaling, conv2d, maxpool2d, dropout, flatten, dense };
std::string to_string(LayerKind kind);

struct CnnLayer {
  LayerKind kind = LayerKind::flatten;
  std::size_t in_c = 0, in_h = 0, in_w = 0;     // input shape (dense: in_c = units)
  std::size_t out_c = 0, out_h = 0, out_w = 0;
  bool relu = false;
  bool l2 = false;
  std::vector<double> weights;  // conv: F x C x 3 x 3; dense: out x in
  std::vector<double> bias;
};

struct CNNModel {
  CNNConfig config;
  std::vector<CnnLayer> layers;

  std::size_t output_units() const { return layers.back().out_c; }
  std::size_t num_classes() const;
  std::size_t parameter_count() const;
};

/// Throws ShapeError when the input is too small for the layer chain.
CNNModel build_cnn(const CNNConfig& config);

std::vector<double> flatten_parameters(const CNNModel& model);
void assign_parameters(CNNModel& model, std::span<const double> params);

/// Channel-first (C x side x side) tensor with raw intensities in [0, 255].
Tensor image_tensor(const RasterImage& image, int side);

/// Raw network outputs (logits) for one input. Dropout is active only when
/// `dropout_seed` is non-null, using masks drawn from that seed.
std::vector<double> cnn_forward(const CNNModel& model, const Tensor& input, const std::uint64_t* dropout_seed = nullptr);

/// Mean loss over the batch (plus L2 terms). With `gradient` non-null the
/// analytic gradient is written in flatten order. `training` enables dropout
/// with masks derived from `dropout_seed`.
double cnn_loss(const CNNModel& model, std::span<const Tensor> inputs, std::span<const int> labels, bool training,
                std::uint64_t dropout_seed, std::vector<double>* gradient = nullptr);

/// The L2 part of cnn_loss on its own.
double cnn_l2_penalty(const CNNModel& model);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

/// Trains on split.train and scores split.validation after every epoch.
CNNModel train_cnn(std::span<const Tensor> images, std::span<const int> labels, const SplitIndex& split,
                   const CNNConfig& config, std::vector<EpochMetrics>* log = nullptr);

/// Scores are softmax probabilities, per-unit sigmoids, or for a single
/// sigmoid unit the pair (1 - p, p).
Prediction predict_cnn(const CNNModel& model, std::span<const Tensor> inputs);

}  // namespace aiart
