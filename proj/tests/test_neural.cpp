#include <doctest.h>

#include <cmath>
#include <numeric>

#include "aiart/error.hpp"
#include "aiart/neural.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace aiart;

using oracle::central_differences;
using oracle::cnn_gradient_error;
using oracle::random_images;
using oracle::random_matrix;

namespace {

const Matrix kXor(4, 2, std::vector<double>{0, 0, 1, 1, 0, 1, 1, 0});
const std::vector<int> kXorLabels{0, 0, 1, 1};

double training_accuracy(const MLPModel& m, const Matrix& x, std::span<const int> y) {
  const auto p = predict_mlp(m, x).labels;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += p[i] == y[i];
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("Adam with zero gradient keeps parameters") {
    Adam adam(3, 0.1);
    std::vector<double> p{1.0, -2.0, 3.5};
    const std::vector<double> zero(3, 0.0);
    for (int i = 0; i < 5; ++i) adam.step(p, zero);
    CHECK(p == std::vector<double>{1.0, -2.0, 3.5});
    CHECK(adam.steps() == 5);
  }

  TEST_CASE("MLP backprop matches central differences") {
    Rng rng(5);
    const Matrix x = random_matrix(rng, 8, 5);
    const std::vector<int> yb{0, 1, 1, 0, 1, 0, 0, 1};
    const std::vector<int> ym{0, 1, 2, 0, 1, 2, 2, 1};
    for (auto act : {Activation::relu, Activation::logistic, Activation::identity})
      for (auto* y : {&yb, &ym}) {
        MLPConfig cfg;
        cfg.hidden_layer_sizes = {6, 4};
        cfg.activation = act;
        cfg.random_state = 3;
        const std::size_t classes = y == &yb ? 2 : 3;
        MLPModel m = init_mlp(5, classes, cfg);
        auto p = flatten_parameters(m);
        for (auto& v : p) v += 0.1 * rng.normal();
        assign_parameters(m, p);
        std::vector<double> g;
        mlp_loss(m, x, *y, 0.05, &g);
        const auto numeric = central_differences(p, [&](const std::vector<double>& q) {
          MLPModel probe = m;
          assign_parameters(probe, q);
          return mlp_loss(probe, x, *y, 0.05);
        }, 1e-6);
        CHECK(testing::relative_error(g, numeric) < 1e-4);
      }
  }

  TEST_CASE("MLP L2 term adds alpha * W to the weight gradient only") {
    Rng rng(9);
    const Matrix x = random_matrix(rng, 8, 5);
    const std::vector<int> y{0, 1, 1, 0, 1, 0, 0, 1};
    MLPConfig cfg;
    cfg.hidden_layer_sizes = {4};
    const MLPModel m = init_mlp(5, 2, cfg);
    std::vector<double> with, without;
    mlp_loss(m, x, y, 0.3, &with);
    mlp_loss(m, x, y, 0.0, &without);
    const auto p = flatten_parameters(m);
    // Flatten order: each layer's weights then its bias.
    std::size_t k = 0;
    for (const auto& layer : m.layers) {
      for (std::size_t i = 0; i < layer.weights.values().size(); ++i, ++k)
        CHECK(with[k] - without[k] == doctest::Approx(0.3 * p[k]).epsilon(1e-12));
      for (std::size_t i = 0; i < layer.bias.size(); ++i, ++k) CHECK(with[k] == without[k]);
    }
    const double penalty = mlp_loss(m, x, y, 0.3) - mlp_loss(m, x, y, 0.0);
    double sq = 0.0;
    for (const auto& layer : m.layers)
      for (double w : layer.weights.values()) sq += w * w;
    CHECK(penalty == doctest::Approx(0.15 * sq).epsilon(1e-12));
  }

  TEST_CASE("MLP learns XOR, an affine network cannot") {
    MLPConfig cfg;
    cfg.hidden_layer_sizes = {50};
    cfg.activation = Activation::relu;
    cfg.max_iter = 1000;
    const auto relu = train_mlp(kXor, kXorLabels, cfg, Task::binary);
    CHECK(training_accuracy(relu, kXor, kXorLabels) == 1.0);
    cfg.activation = Activation::identity;
    const auto affine = train_mlp(kXor, kXorLabels, cfg, Task::binary);
    CHECK(training_accuracy(affine, kXor, kXorLabels) <= 0.75);
  }

  TEST_CASE("MLP training is deterministic and mostly descends") {
    Rng rng(14);
    const Matrix x = random_matrix(rng, 120, 6);
    std::vector<int> y(120);
    for (std::size_t i = 0; i < 120; ++i) y[i] = x(i, 0) + x(i, 1) > 0 ? (x(i, 2) > 0 ? 2 : 1) : 0;
    MLPConfig cfg;
    cfg.max_iter = 30;
    cfg.batch_size = 32;
    const auto a = train_mlp(x, y, cfg, Task::multiclass);
    const auto b = train_mlp(x, y, cfg, Task::multiclass);
    CHECK(flatten_parameters(a) == flatten_parameters(b));
    int down = 0;
    for (std::size_t e = 1; e <= 5; ++e) down += a.loss_curve[e] <= a.loss_curve[e - 1];
    CHECK(down >= 4);
    const auto p = predict_mlp(a, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = p.scores.row(i);
      CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(predict_mlp(a, Matrix(2, 5)), ShapeError);
    const std::vector<int> one_class(120, 1);
    CHECK_THROWS_AS(train_mlp(x, one_class, cfg, Task::multiclass), DegenerateLabels);
  }

  TEST_CASE("CNN architectures") {
    CNNConfig b;
    const auto binary = build_cnn(b);
    REQUIRE(binary.layers.size() == 11);
    const std::vector<LayerKind> expected_b{LayerKind::rescaling, LayerKind::conv2d,  LayerKind::maxpool2d,
                                            LayerKind::conv2d,    LayerKind::maxpool2d, LayerKind::conv2d,
                                            LayerKind::maxpool2d, LayerKind::dropout, LayerKind::flatten,
                                            LayerKind::dense,     LayerKind::dense};
    for (std::size_t i = 0; i < 11; ++i) CHECK(binary.layers[i].kind == expected_b[i]);
    CHECK(binary.layers[1].out_h == 62);
    CHECK(binary.layers[1].out_w == 62);
    CHECK(binary.layers[1].out_c == 16);
    CHECK(binary.layers[5].out_c == 64);
    CHECK(binary.layers[9].out_c == 128);
    CHECK(binary.output_units() == 1);
    for (const auto& l : binary.layers) CHECK_FALSE(l.l2);

    CNNConfig m;
    m.architecture = CnnArchitecture::multiclass9;
    const auto multi = build_cnn(m);
    REQUIRE(multi.layers.size() == 9);
    CHECK(multi.output_units() == 6);
    CHECK(multi.layers[1].l2);
    CHECK(multi.layers[3].l2);
    CHECK(multi.layers[7].l2);
    CHECK_FALSE(multi.layers[8].l2);

    CNNConfig small = b;
    small.input_side = 16;
    CHECK_THROWS_AS(build_cnn(small), ShapeError);
    small.architecture = CnnArchitecture::multiclass9;
    CHECK_NOTHROW(build_cnn(small));
  }

  TEST_CASE("dropout rate 0 is the identity") {
    CNNConfig cfg;
    cfg.input_side = 24;
    cfg.dropout_rate = 0.0;
    const auto model = build_cnn(cfg);
    Rng rng(2);
    const auto img = random_images(rng, 1, 24)[0];
    const std::uint64_t seed = 42;
    CHECK(cnn_forward(model, img, &seed) == cnn_forward(model, img));
    cfg.dropout_rate = 0.5;
    const auto dropped = build_cnn(cfg);
    CHECK(cnn_forward(dropped, img, &seed) != cnn_forward(dropped, img));
  }

  TEST_CASE("CNN gradients match central differences") {
    CNNConfig cfg;
    cfg.architecture = CnnArchitecture::multiclass9;
    cfg.filters = {2, 3};
    cfg.dense_units = 5;
    cfg.dropout_rate = 0.3;
    cfg.l2_weight = 1e-2;
    cfg.seed = 4;
    const std::vector<int> labels{1, 4};
    cfg.final_activation = FinalActivation::softmax;
    CHECK(cnn_gradient_error(cfg, 16, labels, 1) < 1e-4);
    cfg.final_activation = FinalActivation::sigmoid;
    CHECK(cnn_gradient_error(cfg, 16, labels, 2) < 1e-4);

    CNNConfig bin;
    bin.filters = {2, 2, 3};
    bin.dense_units = 4;
    bin.dropout_rate = 0.2;
    bin.seed = 5;
    const std::vector<int> bl{0, 1};
    CHECK(cnn_gradient_error(bin, 22, bl, 3) < 1e-4);
  }

  TEST_CASE("initial six-class loss is near ln 6") {
    CNNConfig cfg;
    cfg.architecture = CnnArchitecture::multiclass9;
    cfg.final_activation = FinalActivation::softmax;
    cfg.seed = 7;
    const auto model = build_cnn(cfg);
    Rng rng(3);
    const auto images = random_images(rng, 12, 64);
    std::vector<int> labels(12);
    for (std::size_t i = 0; i < 12; ++i) labels[i] = static_cast<int>(i % 6);
    const double data_loss = cnn_loss(model, images, labels, false, 0) - cnn_l2_penalty(model);
    CHECK(std::abs(data_loss - std::log(6.0)) < 0.15);
  }

  TEST_CASE("CNN separates black from white") {
    std::vector<Tensor> images;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      const int label = i % 2;
      images.push_back(image_tensor(RasterImage(64, 64, label ? Rgb{255, 255, 255} : Rgb{0, 0, 0}), 64));
      labels.push_back(label);
    }
    const std::vector<double> ratios{0.8, 0.1, 0.1};
    const auto split = stratified_split(labels, ratios, 1);
    CNNConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 1;
    std::vector<EpochMetrics> log;
    const auto model = train_cnn(images, labels, split, cfg, &log);
    REQUIRE(log.size() == 6);
    bool separated = false;
    for (std::size_t e = 0; e < 5; ++e) separated = separated || log[e].val_acc == 1.0;
    CHECK(separated);
    int down = 0;
    for (std::size_t e = 1; e < 6; ++e) down += log[e].train_loss <= log[e - 1].train_loss;
    CHECK(down >= 4);

    const auto again = train_cnn(images, labels, split, cfg);
    CHECK(flatten_parameters(again) == flatten_parameters(model));

    const auto p = predict_cnn(model, images);
    for (std::size_t i = 0; i < images.size(); ++i) {
      CHECK(p.scores(i, 1) > 0.0);
      CHECK(p.scores(i, 1) < 1.0);
    }
  }

  TEST_CASE("softmax CNN scores sum to one") {
    CNNConfig cfg;
    cfg.architecture = CnnArchitecture::multiclass9;
    cfg.final_activation = FinalActivation::softmax;
    cfg.input_side = 20;
    const auto model = build_cnn(cfg);
    Rng rng(1);
    const auto p = predict_cnn(model, random_images(rng, 3, 20));
    for (std::size_t i = 0; i < 3; ++i) {
      const auto row = p.scores.row(i);
      CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(predict_cnn(model, random_images(rng, 1, 21)), ShapeError);
  }
}
