#include "aiart/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "aiart/dataset.hpp"
#include "aiart/error.hpp"
#include "aiart/eval.hpp"
#include "aiart/features.hpp"
#include "aiart/imaging.hpp"
#include "aiart/modelio.hpp"
#include "aiart/preprocess.hpp"
#include "aiart/select.hpp"
#include "aiart/statcore.hpp"
#include "aiart/textio.hpp"

namespace fs = std::filesystem;

namespace aiart {
namespace {

const std::vector<std::string> kBinaryClassNames{"human", "ai"};

struct ExtractArgs {
  std::string root, out, histograms;
  ExtractorConfig extractor{};
  unsigned threads = 0;
  int histogram_bins = 20;
};

struct TrainArgs {
  std::string features, root, model = "svm", task = "binary", grid = "reference", out_model, report_dir;
  std::vector<std::string> sets, keep;
  int folds = 5;
  // CNN only
  int side = 64, epochs = 4, batch = 32, dense = 128;
  std::string arch, final_activation = "sigmoid";
  double dropout = 0.1, l2 = 1e-3, lr = 0.001;
  std::vector<int> filters;
};

struct EvalArgs {
  std::string model, features, root, report_dir;
};

struct PredictArgs {
  std::string model;
  std::vector<std::string> inputs;
};

struct InfoArgs {
  std::string model, features;
};

std::string timestamp_dir() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << "reports/" << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return s.str();
}

std::vector<Setting> parse_sets(const std::vector<std::string>& sets) {
  std::vector<Setting> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidInput("--set expects name=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

Task task_from(const std::string& text) { return parse_task(to_lower(text)); }

struct LabelledTable {
  FeatureTable table;
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

LabelledTable load_table(const std::string& csv, Task task, const std::vector<std::string>& keep) {
  if (csv.empty()) throw InvalidInput("--features is required for feature models");
  LabelledTable t;
  t.table = read_feature_csv(csv);
  if (!keep.empty()) t.table = t.table.project(keep);
  if (task == Task::binary) {
    t.labels = t.table.binary_labels();
    t.class_names = kBinaryClassNames;
  } else {
    t.labels = t.table.class_labels();
    t.class_names = t.table.class_names;
  }
  return t;
}

ExtractorConfig extractor_for(const std::string& csv, std::ostream& err) {
  if (auto c = read_sidecar_extractor(csv)) return *c;
  err << "warning: no readable sidecar next to " << csv << "; recording default extractor settings\n";
  return ExtractorConfig{};
}

void write_histograms(const FeatureTable& table, const std::string& path, int bins) {
  std::string out = "feature,class,bin,low,high,count\n";
  const Matrix x = table.matrix();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double lo = x(0, j), hi = x(0, j);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      lo = std::min(lo, x(r, j));
      hi = std::max(hi, x(r, j));
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    for (std::size_t c = 0; c < table.class_names.size(); ++c) {
      std::vector<double> values;
      for (std::size_t r = 0; r < x.rows(); ++r)
        if (table.rows[r].class_label == static_cast<int>(c)) values.push_back(x(r, j));
      const Histogram h = build_histogram(values, static_cast<std::size_t>(bins), lo, hi);
      for (int b = 0; b < bins; ++b)
        out += csv_escape(table.feature_names[j]) + "," + csv_escape(table.class_names[c]) + "," + std::to_string(b) +
               "," + format_double(lo + b * width) + "," + format_double(lo + (b + 1) * width) + "," +
               format_double(h.counts[static_cast<std::size_t>(b)]) + "\n";
    }
  }
  write_text_file(path, out);
}

int cmd_extract(const ExtractArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const Manifest manifest = scan(a.root);
  for (const auto& w : manifest.warnings) err << "warning: " << w << "\n";
  BuildReport report;
  BuildOptions options{a.extractor, a.threads, seed};
  const FeatureTable table = build_feature_table(manifest, a.out, options, &report);
  for (const auto& f : report.failures) err << "warning: skipped " << f.path << ": " << f.message << "\n";
  std::string hist = a.histograms;
  if (hist.empty()) {
    fs::path p(a.out);
    p.replace_extension(".histograms.csv");
    hist = p.string();
  }
  write_histograms(table, hist, a.histogram_bins);
  out << report.extracted << " extracted, " << report.cached << " cached, " << report.failures.size()
      << " failed\n";
  out << "wrote " << table.size() << " rows to " << a.out << "\n";
  return kExitOk;
}

/// Wraps errors raised while training so the message names the configuration.
template <typename Fn>
auto with_config_context(const std::string& config, Fn&& fn) {
  try {
    return fn();
  } catch (const DegenerateLabels& e) {
    throw TrainingError(std::string(e.what()) + " [" + config + "]");
  } catch (const TrainingError& e) {
    throw TrainingError(std::string(e.what()) + " [" + config + "]");
  }
}

struct FinalFit {
  ModelFile file;
  ExperimentReport report;
};

/// Scaler and model fitted on the training rows, scored on the test rows.
FinalFit fit_and_score(const LabelledTable& t, const SplitIndex& split, const AnyConfig& config, Task task,
                       std::uint64_t seed, const ExtractorConfig& extractor) {
  const Matrix x = t.table.matrix();
  const Matrix raw_train = x.select_rows(split.train);
  const Scaler scaler = Scaler::fit(raw_train);
  const auto y_train = gather(std::span<const int>(t.labels), std::span<const std::size_t>(split.train));
  const auto y_test = gather(std::span<const int>(t.labels), std::span<const std::size_t>(split.test));
  const std::string text = describe(config);
  AnyModel model = with_config_context(text, [&] { return fit_model(scaler.transform(raw_train), y_train, config, task); });
  const auto predicted = predict_labels(model, scaler.transform(x.select_rows(split.test)));

  FinalFit f;
  f.report.task = task;
  f.report.model_family = to_string(family_of(config));
  f.report.best_config = text;
  f.report.feature_names = t.table.feature_names;
  f.report.confusion = confusion(y_test, predicted, t.class_names);
  f.report.test_accuracy = accuracy(y_test, predicted);
  f.report.seed = seed;
  f.report.extractor_config_hash = extractor_hash(extractor);

  f.file.task = task;
  f.file.class_names = t.class_names;
  f.file.feature_names = t.table.feature_names;
  f.file.scaler = scaler;
  std::visit([&](auto& m) { f.file.model = std::move(m); }, model);
  f.file.extractor = extractor;
  f.file.seed = seed;
  f.file.config = text;
  return f;
}

void finish(const FinalFit& f, const std::string& out_model, const std::string& report_dir, std::ostream& out) {
  const std::string dir = report_dir.empty() ? timestamp_dir() : report_dir;
  write_report(f.report, dir);
  if (!out_model.empty()) {
    save_model(f.file, out_model);
    out << "model: " << out_model << "\n";
  }
  out << "config: " << f.report.best_config << "\n";
  out << "cv mean accuracy: " << format_double(f.report.cv_mean_accuracy) << "\n";
  out << "test accuracy: " << format_double(f.report.test_accuracy) << "\n";
  out << "report: " << dir << "\n";
}

int cmd_train_cnn(const TrainArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (a.root.empty()) throw InvalidInput("CNN training reads images: --root is required");
  const Task task = task_from(a.task);
  const Manifest manifest = scan(a.root);
  for (const auto& w : manifest.warnings) err << "warning: " << w << "\n";

  std::vector<Tensor> images;
  std::vector<int> labels;
  for (const auto& e : manifest.entries) {
    try {
      images.push_back(image_tensor(decode_file(e.path), a.side));
    } catch (const DecodeError& ex) {
      err << "warning: skipped " << e.path.string() << ": " << ex.what() << "\n";
      continue;
    }
    const auto& name = manifest.class_names[static_cast<std::size_t>(e.class_label)];
    labels.push_back(task == Task::binary ? binary_label_for(name) : e.class_label);
  }
  if (images.empty()) throw EmptyDataset("no decodable image under " + a.root);
  const auto class_names = task == Task::binary ? kBinaryClassNames : manifest.class_names;

  CNNConfig cfg;
  cfg.input_side = a.side;
  cfg.architecture = a.arch.empty() ? (task == Task::binary ? CnnArchitecture::binary11 : CnnArchitecture::multiclass9)
                                    : parse_architecture(a.arch);
  cfg.dropout_rate = a.dropout;
  cfg.l2_weight = a.l2;
  cfg.final_activation = parse_final_activation(a.final_activation);
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.seed = seed;
  cfg.batch_size = a.batch;
  cfg.filters = a.filters;
  cfg.dense_units = a.dense;
  cfg.num_classes = static_cast<int>(class_names.size());

  const std::vector<double> ratios{0.8, 0.1, 0.1};
  const SplitIndex split = stratified_split(labels, ratios, seed, class_names);
  std::ostringstream text;
  text << "architecture=" << to_string(cfg.architecture) << " input_side=" << cfg.input_side
       << " dropout=" << format_double(cfg.dropout_rate) << " l2=" << format_double(cfg.l2_weight)
       << " final_activation=" << to_string(cfg.final_activation) << " learning_rate=" << format_double(cfg.learning_rate)
       << " epochs=" << cfg.epochs << " batch_size=" << cfg.batch_size;

  std::vector<EpochMetrics> log;
  const CNNModel model =
      with_config_context(text.str(), [&] { return train_cnn(images, labels, split, cfg, &log); });
  std::vector<Tensor> test_x;
  std::vector<int> test_y;
  for (auto i : split.test) {
    test_x.push_back(images[i]);
    test_y.push_back(labels[i]);
  }
  const auto predicted = predict_cnn(model, test_x).labels;

  FinalFit f;
  f.report.task = task;
  f.report.model_family = "cnn";
  f.report.best_config = text.str();
  f.report.confusion = confusion(test_y, predicted, class_names);
  f.report.test_accuracy = accuracy(test_y, predicted);
  f.report.cv_mean_accuracy = log.empty() ? 0.0 : log.back().val_acc;
  f.report.epochs = log;
  f.report.seed = seed;
  f.report.extractor_config_hash = extractor_hash(ExtractorConfig{});
  f.report.notes.push_back("split 80:10:10 (train:test:validation); the cv accuracy line holds the final "
                           "validation accuracy");
  f.file.task = task;
  f.file.class_names = class_names;
  f.file.model = model;
  f.file.seed = seed;
  f.file.config = text.str();
  finish(f, a.out_model, a.report_dir, out);
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (to_lower(a.model) == "cnn") return cmd_train_cnn(a, seed, out, err);
  const Task task = task_from(a.task);
  const ModelFamily family = parse_family(a.model);
  const LabelledTable t = load_table(a.features, task, a.keep);
  const ExtractorConfig extractor = extractor_for(a.features, err);
  const std::vector<double> ratios{0.8, 0.2};
  const SplitIndex split = stratified_split(t.labels, ratios, seed, t.class_names);
  const Matrix x = t.table.matrix();
  CvOptions cv{a.folds, seed, t.class_names, {}};

  const auto settings = parse_sets(a.sets);
  AnyConfig config;
  std::vector<CellResult> grid_cells;
  double cv_mean = 0.0;
  if (!settings.empty() || to_lower(a.grid) == "none") {
    config = make_config(family, settings);
    const auto folds = with_config_context(describe(config), [&] {
      return cv_accuracy(x, t.labels, split.train, config, task, cv);
    });
    double s = 0.0;
    for (double v : folds) s += v;
    cv_mean = s / static_cast<double>(folds.size());
  } else if (to_lower(a.grid) == "reference") {
    const GridSpec grid = reference_grid(family);
    err << "grid search: " << grid.cell_count() << " cells x " << a.folds << " folds\n";
    GridResult g = grid_search(grid, x, t.labels, split.train, task, cv);
    config = g.best_config;
    cv_mean = g.cells[g.best].mean_accuracy;
    grid_cells = std::move(g.cells);
  } else {
    throw InvalidInput("--grid must be 'reference' or 'none', got '" + a.grid + "'");
  }

  FinalFit f = fit_and_score(t, split, config, task, seed, extractor);
  f.report.cv_mean_accuracy = cv_mean;
  f.report.grid = std::move(grid_cells);
  f.report.notes.push_back("split 80:20 (train:test); " + std::to_string(a.folds) +
                           "-fold stratified cross-validation on the training part");
  finish(f, a.out_model, a.report_dir, out);
  return kExitOk;
}

int cmd_rfe(const TrainArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const Task task = task_from(a.task);
  const ModelFamily family = parse_family(a.model);
  const LabelledTable full = load_table(a.features, task, a.keep);
  const ExtractorConfig extractor = extractor_for(a.features, err);
  const std::vector<double> ratios{0.8, 0.2};
  const SplitIndex split = stratified_split(full.labels, ratios, seed, full.class_names);
  const AnyConfig config = make_config(family, parse_sets(a.sets));
  CvOptions cv{a.folds, seed, full.class_names, {}};
  RFECurve curve = with_config_context(describe(config), [&] {
    return rfe(full.table.matrix(), full.labels, split.train, full.table.feature_names, config, task, cv);
  });
  const RFEPoint& best = best_point(curve);

  LabelledTable reduced = full;
  reduced.table = full.table.project(best.kept_features);
  FinalFit f = fit_and_score(reduced, split, config, task, seed, extractor);
  f.report.cv_mean_accuracy = best.cv_accuracy;
  f.report.rfe_curve = std::move(curve);
  f.report.notes.push_back("test accuracy refers to the best curve point (" + std::to_string(best.feature_count) +
                           " features), refitted on the training part");
  finish(f, a.out_model, a.report_dir, out);
  out << "best feature count: " << best.feature_count << "\n";
  return kExitOk;
}

/// Labels of a feature table expressed in the model's class indices.
std::vector<int> labels_for_model(const FeatureTable& table, const ModelFile& file) {
  if (file.task == Task::binary) return table.binary_labels();
  std::vector<int> out;
  for (const auto& row : table.rows) {
    const auto& name = table.class_names[static_cast<std::size_t>(row.class_label)];
    const auto it = std::find(file.class_names.begin(), file.class_names.end(), name);
    if (it == file.class_names.end()) throw LabelError("class '" + name + "' is unknown to the model");
    out.push_back(static_cast<int>(it - file.class_names.begin()));
  }
  return out;
}

AnyModel feature_model(const ModelFile& file) {
  switch (file.model.index()) {
    case 0: return std::get<LRModel>(file.model);
    case 1: return std::get<SVMModel>(file.model);
    case 2: return std::get<MLPModel>(file.model);
    default: throw InvalidInput("CNN models predict from images, not feature rows");
  }
}

Matrix scaled_rows(const ModelFile& file, const FeatureTable& table) {
  const FeatureTable projected = table.project(file.feature_names);
  if (projected.feature_names.size() != file.scaler->width()) throw ShapeError("feature subset width mismatch");
  return file.scaler->transform(projected.matrix());
}

int cmd_evaluate(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const ModelFile file = load_model(a.model);
  std::vector<int> truth, predicted;
  if (file.family() == "cnn") {
    if (a.root.empty()) throw InvalidInput("CNN evaluation reads images: --root is required");
    const auto& model = std::get<CNNModel>(file.model);
    const Manifest manifest = scan(a.root);
    std::vector<Tensor> images;
    for (const auto& e : manifest.entries) {
      try {
        images.push_back(image_tensor(decode_file(e.path), model.config.input_side));
      } catch (const DecodeError& ex) {
        err << "warning: skipped " << e.path.string() << ": " << ex.what() << "\n";
        continue;
      }
      const auto& name = manifest.class_names[static_cast<std::size_t>(e.class_label)];
      if (file.task == Task::binary) {
        truth.push_back(binary_label_for(name));
      } else {
        const auto it = std::find(file.class_names.begin(), file.class_names.end(), name);
        if (it == file.class_names.end()) throw LabelError("class '" + name + "' is unknown to the model");
        truth.push_back(static_cast<int>(it - file.class_names.begin()));
      }
    }
    if (images.empty()) throw EmptyDataset("no decodable image under " + a.root);
    predicted = predict_cnn(model, images).labels;
  } else {
    if (a.features.empty()) throw InvalidInput("--features is required for feature models");
    const FeatureTable table = read_feature_csv(a.features);
    truth = labels_for_model(table, file);
    predicted = predict_labels(feature_model(file), scaled_rows(file, table));
  }
  ExperimentReport r;
  r.task = file.task;
  r.model_family = file.family();
  r.best_config = file.config;
  r.feature_names = file.feature_names;
  r.confusion = confusion(truth, predicted, file.class_names);
  r.test_accuracy = accuracy(truth, predicted);
  r.seed = file.seed;
  r.extractor_config_hash = extractor_hash(file.extractor);
  r.notes.push_back("evaluation of a saved model; no cross-validation was run");
  if (!a.report_dir.empty()) write_report(r, a.report_dir);
  out << "accuracy: " << format_double(r.test_accuracy) << " (" << r.confusion.trace() << "/" << r.confusion.total()
      << ")\n";
  out << render_report(r)[2].second;
  return kExitOk;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p, ec))
        if (e.is_regular_file() && has_image_extension(e.path())) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const ModelFile file = load_model(a.model);
  const bool cnn = file.family() == "cnn";
  std::optional<AnyModel> model;
  if (!cnn) model = feature_model(file);
  std::vector<std::size_t> columns;
  for (const auto& name : file.feature_names) columns.push_back(feature_index(name));

  auto emit = [&](const std::string& path, int label, double score) {
    out << csv_escape(path) << "," << csv_escape(file.class_names.at(static_cast<std::size_t>(label))) << ","
        << format_double(score) << "\n";
  };
  auto predict_rows = [&](const Matrix& scaled, const std::vector<std::string>& paths) {
    const auto labels = predict_labels(*model, scaled);
    const Matrix scores = predict_scores(*model, scaled);
    for (std::size_t i = 0; i < paths.size(); ++i)
      emit(paths[i], labels[i], scores(i, static_cast<std::size_t>(labels[i])));
  };

  bool failed = false;
  for (const auto& path : expand_inputs(a.inputs)) {
    try {
      if (!cnn && to_lower(path.extension().string()) == ".csv") {
        const FeatureTable table = read_feature_csv(path);
        std::vector<std::string> paths;
        for (const auto& r : table.rows) paths.push_back(r.path);
        predict_rows(scaled_rows(file, table), paths);
        continue;
      }
      const RasterImage image = decode_file(path);
      if (cnn) {
        const auto& m = std::get<CNNModel>(file.model);
        const std::vector<Tensor> batch{image_tensor(image, m.config.input_side)};
        const Prediction p = predict_cnn(m, batch);
        emit(path.string(), p.labels[0], p.scores(0, static_cast<std::size_t>(p.labels[0])));
      } else {
        const FeatureVector v = extract_all(image, file.extractor);
        std::vector<double> row;
        for (auto c : columns) row.push_back(v[c]);
        Matrix scaled(1, row.size(), file.scaler->transform_row(row));
        predict_rows(scaled, {path.string()});
      }
    } catch (const Error& e) {
      err << "error: " << path.string() << ": " << e.what() << "\n";
      failed = true;
    }
  }
  return failed ? kExitData : kExitOk;
}

int cmd_info(const InfoArgs& a, std::ostream& out) {
  if (a.model.empty() && a.features.empty()) throw InvalidInput("info needs --model or --features");
  if (!a.model.empty()) {
    const ModelFile f = load_model(a.model);
    out << "format version: " << kModelFormatVersion << "\n";
    out << "family: " << f.family() << "\n";
    out << "task: " << to_string(f.task) << "\n";
    out << "classes: " << join(f.class_names, ", ") << "\n";
    out << "config: " << f.config << "\n";
    out << "seed: " << f.seed << "\n";
    if (f.family() == "cnn") {
      const auto& m = std::get<CNNModel>(f.model);
      out << "input side: " << m.config.input_side << "\n";
      out << "layers (" << m.layers.size() << "):";
      for (const auto& l : m.layers) out << " " << to_string(l.kind);
      out << "\nparameters: " << m.parameter_count() << "\n";
    } else {
      out << "features (" << f.feature_names.size() << "): " << join(f.feature_names, ", ") << "\n";
      out << "extractor config hash: " << extractor_hash(f.extractor) << "\n";
    }
  }
  if (!a.features.empty()) {
    const FeatureTable t = read_feature_csv(a.features);
    out << "rows: " << t.size() << "\n";
    out << "features: " << t.feature_names.size() << "\n";
    std::vector<std::size_t> counts(t.class_names.size(), 0);
    for (const auto& r : t.rows) ++counts[static_cast<std::size_t>(r.class_label)];
    for (std::size_t c = 0; c < counts.size(); ++c)
      out << "class " << t.class_names[c] << " (" << (binary_label_for(t.class_names[c]) ? "ai" : "human")
          << "): " << counts[c] << "\n";
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const DegenerateLabels*>(&e)) return kExitTraining;
  if (dynamic_cast<const InvalidInput*>(&e)) return kExitUsage;
  return kExitData;
}

void add_train_options(CLI::App* cmd, TrainArgs& a, bool cnn_options) {
  cmd->add_option("--features", a.features, "feature cache CSV");
  cmd->add_option("--task", a.task, "binary or multiclass")->capture_default_str();
  cmd->add_option("--model", a.model, "lr, svm, mlp" + std::string(cnn_options ? " or cnn" : ""))->capture_default_str();
  cmd->add_option("--set", a.sets, "fixed hyperparameter name=value (repeatable)");
  cmd->add_option("--keep", a.keep, "train on these feature columns only")->delimiter(',');
  cmd->add_option("--folds", a.folds, "cross-validation folds")->capture_default_str()->check(CLI::Range(2, 100));
  cmd->add_option("--out-model", a.out_model, "where to write the model file");
  cmd->add_option("--report-dir", a.report_dir, "report directory (default reports/<UTC timestamp>)");
  if (!cnn_options) return;
  cmd->add_option("--grid", a.grid, "reference (searched value sets) or none")->capture_default_str();
  cmd->add_option("--root", a.root, "image tree for CNN training");
  cmd->add_option("--side", a.side, "CNN input side")->capture_default_str();
  cmd->add_option("--arch", a.arch, "binary11 or multiclass9 (default by task)");
  cmd->add_option("--epochs", a.epochs, "CNN epochs")->capture_default_str();
  cmd->add_option("--dropout", a.dropout, "CNN dropout rate")->capture_default_str();
  cmd->add_option("--final", a.final_activation, "sigmoid or softmax")->capture_default_str();
  cmd->add_option("--l2", a.l2, "CNN L2 weight")->capture_default_str();
  cmd->add_option("--lr", a.lr, "CNN learning rate")->capture_default_str();
  cmd->add_option("--batch", a.batch, "CNN batch size")->capture_default_str();
  cmd->add_option("--filters", a.filters, "CNN filter counts")->delimiter(',');
  cmd->add_option("--dense", a.dense, "CNN dense width")->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hand-crafted feature and CNN classifiers for AI-generated versus human art", "aiart"};
  app.set_config("--config", "", "read options from a TOML/INI file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for splits, folds and initialization")->capture_default_str();

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "extract the 39 features of an image tree into a CSV cache");
  extract->add_option("--root", ex.root, "root/<class>/<images>")->required();
  extract->add_option("--out", ex.out, "feature cache CSV")->required();
  extract->add_option("--histograms", ex.histograms, "per-class feature histogram CSV (default <out>.histograms.csv)");
  extract->add_option("--histogram-bins", ex.histogram_bins, "bins per histogram")->capture_default_str()->check(CLI::PositiveNumber);
  extract->add_option("--resize", ex.extractor.resize_side, "square side images are resized to")->capture_default_str()->check(CLI::PositiveNumber);
  extract->add_option("--canny-low", ex.extractor.canny.low, "Canny low threshold")->capture_default_str();
  extract->add_option("--canny-high", ex.extractor.canny.high, "Canny high threshold")->capture_default_str();
  extract->add_option("--canny-sigma", ex.extractor.canny.sigma, "Canny Gaussian sigma")->capture_default_str();
  extract->add_option("--glcm-levels", ex.extractor.glcm_levels, "GLCM gray levels")->capture_default_str()->check(CLI::Range(2, 256));
  extract->add_option("--threads", ex.threads, "worker threads (0 = all cores)")->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "split, search or fix hyperparameters, fit, test, save");
  add_train_options(train, tr, true);

  TrainArgs rf;
  rf.model = "lr";
  auto* rfe_cmd = app.add_subcommand("rfe", "recursive feature elimination curve, refit at the best count");
  add_train_options(rfe_cmd, rf, false);

  EvalArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a labelled CSV or image tree");
  evaluate->add_option("--model", ev.model, "model file")->required();
  evaluate->add_option("--features", ev.features, "labelled feature CSV");
  evaluate->add_option("--root", ev.root, "labelled image tree (CNN models)");
  evaluate->add_option("--report-dir", ev.report_dir, "also write a report here");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "print path,label,score for images, directories or feature CSVs");
  predict->add_option("--model", pr.model, "model file")->required();
  predict->add_option("inputs", pr.inputs, "image files, directories or CSVs")->required();

  InfoArgs in;
  auto* info = app.add_subcommand("info", "describe a model file or a feature CSV");
  info->add_option("--model", in.model, "model file");
  info->add_option("--features", in.features, "feature CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(ex, seed, out, err);
    if (train->parsed()) return cmd_train(tr, seed, out, err);
    if (rfe_cmd->parsed()) return cmd_rfe(rf, seed, out, err);
    if (evaluate->parsed()) return cmd_evaluate(ev, out, err);
    if (predict->parsed()) return cmd_predict(pr, out, err);
    if (info->parsed()) return cmd_info(in, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace aiart
