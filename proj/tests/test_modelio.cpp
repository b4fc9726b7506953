#include <doctest.h>

#include "aiart/error.hpp"
#include "aiart/modelio.hpp"
#include "aiart/select.hpp"
#include "support.hpp"

using namespace aiart;

namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
};

Data blobs(std::size_t n, std::size_t d, int classes, std::uint64_t seed) {
  Rng rng(seed);
  Data out{Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (std::size_t j = 0; j < d; ++j) out.x(i, j) = rng.normal() + (j == static_cast<std::size_t>(out.y[i]) ? 2.0 : 0.0);
  }
  return out;
}

ModelFile feature_file(const AnyModel& model, std::size_t width, std::size_t classes, const Matrix& x) {
  ModelFile f;
  f.task = classes == 2 ? Task::binary : Task::multiclass;
  for (std::size_t c = 0; c < classes; ++c) f.class_names.push_back("class" + std::to_string(c));
  for (std::size_t j = 0; j < width; ++j) f.feature_names.emplace_back(kFeatureNames[j]);
  f.scaler = Scaler::fit(x);
  std::visit([&](const auto& m) { f.model = m; }, model);
  f.seed = 17;
  f.config = "test";
  return f;
}

AnyModel as_any(const ModelFile& f) {
  switch (f.model.index()) {
    case 0: return std::get<LRModel>(f.model);
    case 1: return std::get<SVMModel>(f.model);
    default: return std::get<MLPModel>(f.model);
  }
}

}  // namespace

TEST_SUITE("modelio") {
  TEST_CASE("feature models reload with bitwise-identical predictions") {
    for (int classes : {2, 3}) {
      const auto data = blobs(90, 6, classes, 5);
      const Task task = classes == 2 ? Task::binary : Task::multiclass;
      MLPConfig mlp;
      mlp.hidden_layer_sizes = {7};
      mlp.max_iter = 20;
      for (const AnyConfig& cfg : {AnyConfig{LRConfig{}}, AnyConfig{SVMConfig{}}, AnyConfig{mlp}}) {
        const AnyModel model = fit_model(data.x, data.y, cfg, task);
        const ModelFile f = feature_file(model, 6, static_cast<std::size_t>(classes), data.x);
        const std::string text = serialize_model(f);
        const ModelFile back = parse_model(text);
        CHECK(back.family() == to_string(family_of(cfg)));
        CHECK(back.scaler == f.scaler);
        CHECK(back.feature_names == f.feature_names);
        CHECK(back.class_names == f.class_names);
        CHECK(back.seed == 17);
        const auto a = predict_scores(model, data.x);
        const auto b = predict_scores(as_any(back), data.x);
        CHECK(a == b);
        CHECK(predict_labels(model, data.x) == predict_labels(as_any(back), data.x));
        CHECK(serialize_model(back) == text);
      }
    }
  }

  TEST_CASE("CNN reloads with bitwise-identical predictions") {
    CNNConfig cfg;
    cfg.input_side = 24;
    cfg.filters = {3, 4, 5};
    cfg.dense_units = 6;
    cfg.seed = 9;
    ModelFile f;
    f.class_names = {"human", "ai"};
    f.model = build_cnn(cfg);
    const ModelFile back = parse_model(serialize_model(f));
    Rng rng(2);
    std::vector<Tensor> images;
    for (int i = 0; i < 3; ++i) images.push_back(image_tensor(testing::random_raster(rng, 30, 30), 24));
    const auto a = predict_cnn(std::get<CNNModel>(f.model), images);
    const auto b = predict_cnn(std::get<CNNModel>(back.model), images);
    CHECK(a.scores == b.scores);
    CHECK(a.labels == b.labels);
  }

  TEST_CASE("foreign, future and damaged files are rejected") {
    const auto data = blobs(40, 3, 2, 1);
    const ModelFile f = feature_file(fit_model(data.x, data.y, LRConfig{}, Task::binary), 3, 2, data.x);
    std::string text = serialize_model(f);

    std::string future = text;
    future.replace(future.find("\"format_version\": 1"), 19, "\"format_version\": 2");
    CHECK_THROWS_AS(parse_model(future), UnsupportedModelFile);
    CHECK_THROWS_AS(parse_model("{\"format\": \"something-else\"}"), UnsupportedModelFile);
    CHECK_THROWS_AS(parse_model(text.substr(0, text.size() / 2)), UnsupportedModelFile);
    CHECK_THROWS_AS(parse_model("garbage"), UnsupportedModelFile);
    std::string no_scaler = text;
    const auto at = no_scaler.find("\"scaler\": {");
    REQUIRE(at != std::string::npos);
    CHECK_THROWS_AS(parse_model(no_scaler.replace(at, 11, "\"scaler\": null, \"x\": {")), UnsupportedModelFile);

    testing::TempDir dir("modelio");
    save_model(f, dir / "m.json");
    CHECK(serialize_model(load_model(dir / "m.json")) == text);
  }
}
