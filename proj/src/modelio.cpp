#include "aiart/modelio.hpp"

#include <json.hpp>

#include "aiart/error.hpp"
#include "aiart/textio.hpp"

namespace aiart {

using nlohmann::ordered_json;

std::string ModelFile::family() const {
  switch (model.index()) {
    case 0: return "lr";
    case 1: return "svm";
    case 2: return "mlp";
    default: return "cnn";
  }
}

namespace {

ordered_json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const ordered_json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("values").get<std::vector<double>>());
}

ordered_json extractor_json(const ExtractorConfig& c) {
  return {{"resize_side", c.resize_side},
          {"canny_low", c.canny.low},
          {"canny_high", c.canny.high},
          {"canny_sigma", c.canny.sigma},
          {"glcm_levels", c.glcm_levels}};
}

ExtractorConfig extractor_from(const ordered_json& j) {
  ExtractorConfig c;
  c.resize_side = j.at("resize_side").get<int>();
  c.canny.low = j.at("canny_low").get<double>();
  c.canny.high = j.at("canny_high").get<double>();
  c.canny.sigma = j.at("canny_sigma").get<double>();
  c.glcm_levels = j.at("glcm_levels").get<int>();
  return c;
}

ordered_json params_json(const LRModel& m) {
  return {{"num_classes", m.num_classes},
          {"weights", matrix_json(m.weights)},
          {"biases", m.biases},
          {"iterations", m.iterations},
          {"converged", m.converged}};
}

ordered_json params_json(const SVMModel& m) {
  ordered_json machines = ordered_json::array();
  for (const auto& b : m.machines)
    machines.push_back({{"positive", b.positive},
                        {"negative", b.negative},
                        {"support_vectors", matrix_json(b.support_vectors)},
                        {"dual_coef", b.dual_coef},
                        {"bias", b.bias},
                        {"converged", b.converged}});
  return {{"kernel", to_string(m.kernel)},
          {"gamma", m.gamma},
          {"num_classes", m.num_classes},
          {"width", m.width},
          {"machines", machines}};
}

ordered_json params_json(const MLPModel& m) {
  ordered_json layers = ordered_json::array();
  for (const auto& l : m.layers) layers.push_back({{"weights", matrix_json(l.weights)}, {"bias", l.bias}});
  return {{"activation", to_string(m.activation)},
          {"num_classes", m.num_classes},
          {"layers", layers},
          {"loss_curve", m.loss_curve}};
}

ordered_json params_json(const CNNModel& m) {
  const auto& c = m.config;
  ordered_json layers = ordered_json::array();
  for (const auto& l : m.layers) {
    if (l.weights.empty() && l.bias.empty()) continue;
    layers.push_back({{"kind", to_string(l.kind)}, {"weights", l.weights}, {"bias", l.bias}});
  }
  return {{"config",
           {{"input_side", c.input_side},
            {"channels", c.channels},
            {"architecture", to_string(c.architecture)},
            {"dropout_rate", c.dropout_rate},
            {"l2_weight", c.l2_weight},
            {"final_activation", to_string(c.final_activation)},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"batch_size", c.batch_size},
            {"filters", c.filters},
            {"dense_units", c.dense_units},
            {"num_classes", c.num_classes}}},
          {"layers", layers}};
}

LRModel lr_from(const ordered_json& j) {
  LRModel m;
  m.num_classes = j.at("num_classes").get<std::size_t>();
  m.weights = matrix_from(j.at("weights"));
  m.biases = j.at("biases").get<std::vector<double>>();
  m.iterations = j.at("iterations").get<int>();
  m.converged = j.at("converged").get<bool>();
  if (m.biases.size() != m.weights.rows()) throw ShapeError("LR bias count does not match weight rows");
  return m;
}

SVMModel svm_from(const ordered_json& j) {
  SVMModel m;
  m.kernel = parse_kernel(j.at("kernel").get<std::string>());
  m.gamma = j.at("gamma").get<double>();
  m.num_classes = j.at("num_classes").get<std::size_t>();
  m.width = j.at("width").get<std::size_t>();
  for (const auto& b : j.at("machines")) {
    BinarySvm machine;
    machine.positive = b.at("positive").get<int>();
    machine.negative = b.at("negative").get<int>();
    machine.support_vectors = matrix_from(b.at("support_vectors"));
    machine.dual_coef = b.at("dual_coef").get<std::vector<double>>();
    machine.bias = b.at("bias").get<double>();
    machine.converged = b.at("converged").get<bool>();
    if (machine.dual_coef.size() != machine.support_vectors.rows())
      throw ShapeError("SVM coefficient count does not match support vectors");
    m.machines.push_back(std::move(machine));
  }
  return m;
}

MLPModel mlp_from(const ordered_json& j) {
  MLPModel m;
  m.activation = parse_activation(j.at("activation").get<std::string>());
  m.num_classes = j.at("num_classes").get<std::size_t>();
  for (const auto& l : j.at("layers")) {
    DenseLayer layer{matrix_from(l.at("weights")), l.at("bias").get<std::vector<double>>()};
    if (layer.bias.size() != layer.weights.rows()) throw ShapeError("MLP bias count does not match weight rows");
    m.layers.push_back(std::move(layer));
  }
  if (m.layers.empty()) throw ShapeError("MLP has no layers");
  m.loss_curve = j.at("loss_curve").get<std::vector<double>>();
  return m;
}

CNNModel cnn_from(const ordered_json& j) {
  const auto& c = j.at("config");
  CNNConfig cfg;
  cfg.input_side = c.at("input_side").get<int>();
  cfg.channels = c.at("channels").get<int>();
  cfg.architecture = parse_architecture(c.at("architecture").get<std::string>());
  cfg.dropout_rate = c.at("dropout_rate").get<double>();
  cfg.l2_weight = c.at("l2_weight").get<double>();
  cfg.final_activation = parse_final_activation(c.at("final_activation").get<std::string>());
  cfg.learning_rate = c.at("learning_rate").get<double>();
  cfg.epochs = c.at("epochs").get<int>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  cfg.batch_size = c.at("batch_size").get<int>();
  cfg.filters = c.at("filters").get<std::vector<int>>();
  cfg.dense_units = c.at("dense_units").get<int>();
  cfg.num_classes = c.at("num_classes").get<int>();
  CNNModel m = build_cnn(cfg);
  const auto& stored = j.at("layers");
  std::size_t k = 0;
  for (auto& layer : m.layers) {
    if (layer.weights.empty() && layer.bias.empty()) continue;
    if (k >= stored.size()) throw ShapeError("CNN file has too few parameter layers");
    const auto& s = stored[k++];
    auto w = s.at("weights").get<std::vector<double>>();
    auto b = s.at("bias").get<std::vector<double>>();
    if (w.size() != layer.weights.size() || b.size() != layer.bias.size())
      throw ShapeError("CNN layer parameter count does not match the architecture");
    layer.weights = std::move(w);
    layer.bias = std::move(b);
  }
  if (k != stored.size()) throw ShapeError("CNN file has too many parameter layers");
  return m;
}

}  // namespace

std::string serialize_model(const ModelFile& file) {
  ordered_json j;
  j["format"] = "aiart-model";
  j["format_version"] = kModelFormatVersion;
  j["family"] = file.family();
  j["task"] = to_string(file.task);
  j["class_names"] = file.class_names;
  j["feature_names"] = file.feature_names;
  if (file.scaler)
    j["scaler"] = {{"means", file.scaler->means}, {"stds", file.scaler->stds}};
  else
    j["scaler"] = nullptr;
  j["extractor_config"] = extractor_json(file.extractor);
  j["seed"] = file.seed;
  j["config"] = file.config;
  j["parameters"] = std::visit([](const auto& m) { return params_json(m); }, file.model);
  return j.dump(1) + "\n";
}

ModelFile parse_model(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw UnsupportedModelFile(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) != "aiart-model")
      throw UnsupportedModelFile("not an aiart model file");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw UnsupportedModelFile("model file format version " + std::to_string(version) +
                                 " is not supported (this build reads version " +
                                 std::to_string(kModelFormatVersion) + ")");
    ModelFile f;
    f.task = parse_task(j.at("task").get<std::string>());
    f.class_names = j.at("class_names").get<std::vector<std::string>>();
    f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("scaler").is_null()) {
      Scaler s{j["scaler"].at("means").get<std::vector<double>>(), j["scaler"].at("stds").get<std::vector<double>>()};
      if (s.means.size() != s.stds.size()) throw ShapeError("scaler means and stds differ in length");
      f.scaler = std::move(s);
    }
    f.extractor = extractor_from(j.at("extractor_config"));
    f.seed = j.at("seed").get<std::uint64_t>();
    f.config = j.at("config").get<std::string>();
    const auto family = j.at("family").get<std::string>();
    const auto& p = j.at("parameters");
    if (family == "lr") f.model = lr_from(p);
    else if (family == "svm") f.model = svm_from(p);
    else if (family == "mlp") f.model = mlp_from(p);
    else if (family == "cnn") f.model = cnn_from(p);
    else throw UnsupportedModelFile("unknown model family '" + family + "'");
    if (family != "cnn") {
      if (!f.scaler) throw ShapeError("feature model without a scaler");
      if (f.scaler->width() != f.feature_names.size())
        throw ShapeError("scaler width does not match the feature list");
    }
    return f;
  } catch (const UnsupportedModelFile&) {
    throw;
  } catch (const std::exception& e) {
    throw UnsupportedModelFile(std::string("damaged model file: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(file));
}

ModelFile load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

}  // namespace aiart
