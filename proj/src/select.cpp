#include "aiart/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "aiart/dataset.hpp"
#include "aiart/error.hpp"
#include "aiart/preprocess.hpp"
#include "aiart/textio.hpp"

namespace aiart {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::lr: return "lr";
    case ModelFamily::svm: return "svm";
    case ModelFamily::mlp: return "mlp";
  }
  return "?";
}

ModelFamily parse_family(std::string_view text) {
  const auto t = to_lower(text);
  if (t == "lr") return ModelFamily::lr;
  if (t == "svm") return ModelFamily::svm;
  if (t == "mlp") return ModelFamily::mlp;
  throw InvalidInput("unknown model family '" + std::string(text) + "' (lr|svm|mlp)");
}

ModelFamily family_of(const AnyConfig& config) { return static_cast<ModelFamily>(config.index()); }
ModelFamily family_of(const AnyModel& model) { return static_cast<ModelFamily>(model.index()); }

namespace {

double positive_real(const Setting& s) {
  const double v = parse_double(s.second);
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(s.first + " must be a positive number, got '" + s.second + "'");
  return v;
}

double non_negative_real(const Setting& s) {
  const double v = parse_double(s.second);
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput(s.first + " must be >= 0, got '" + s.second + "'");
  return v;
}

int positive_int(const Setting& s) {
  const long long v = parse_int(s.second);
  if (v <= 0 || v > 1'000'000'000) throw InvalidInput(s.first + " must be a positive integer, got '" + s.second + "'");
  return static_cast<int>(v);
}

/// "(50,)", "(50, 50)", "50", "50,50" and "50x50" all parse.
std::vector<int> parse_layers(const Setting& s) {
  std::string text;
  for (char ch : s.second)
    if (ch != '(' && ch != ')' && ch != ' ') text += ch == 'x' ? ',' : ch;
  std::vector<int> out;
  for (const auto& part : split(text, ','))
    if (!part.empty()) out.push_back(positive_int({s.first, part}));
  if (out.empty()) throw InvalidInput("hidden_layer_sizes needs at least one layer, got '" + s.second + "'");
  return out;
}

std::string canonical_name(std::string_view name) {
  auto n = to_lower(name);
  if (n == "c") return "C";
  if (n == "tol") return "tolerance";
  return n;
}

}  // namespace

std::optional<std::string> unsupported_reason(ModelFamily family, std::span<const Setting> settings) {
  if (family != ModelFamily::lr) return std::nullopt;
  for (const auto& [name, value] : settings)
    if (canonical_name(name) == "penalty" && to_lower(value) != "l2")
      return "penalty '" + value + "' is not trained; only l2 is implemented";
  return std::nullopt;
}

AnyConfig make_config(ModelFamily family, std::span<const Setting> settings) {
  if (auto reason = unsupported_reason(family, settings)) throw InvalidInput(*reason);
  switch (family) {
    case ModelFamily::lr: {
      LRConfig c;
      for (const auto& raw : settings) {
        const Setting s{canonical_name(raw.first), raw.second};
        if (s.first == "C") c.c = positive_real(s);
        else if (s.first == "max_iter") c.max_iter = positive_int(s);
        else if (s.first == "tolerance") c.tolerance = positive_real(s);
        else if (s.first == "penalty") continue;
        else if (s.first == "solver") {
          const auto v = to_lower(s.second);
          if (v != "lbfgs" && v != "saga" && v != "liblinear" && v != "gd")
            throw InvalidInput("unknown LR solver '" + s.second + "'");
        } else
          throw InvalidInput("unknown LR setting '" + raw.first + "'");
      }
      return c;
    }
    case ModelFamily::svm: {
      SVMConfig c;
      for (const auto& raw : settings) {
        const Setting s{canonical_name(raw.first), raw.second};
        if (s.first == "C") c.c = positive_real(s);
        else if (s.first == "kernel") c.kernel = parse_kernel(to_lower(s.second));
        else if (s.first == "gamma") c.gamma = Gamma::parse(to_lower(s.second));
        else if (s.first == "tolerance") c.tolerance = positive_real(s);
        else if (s.first == "max_passes") c.max_passes = positive_int(s);
        else
          throw InvalidInput("unknown SVM setting '" + raw.first + "'");
      }
      return c;
    }
    case ModelFamily::mlp: {
      MLPConfig c;
      for (const auto& raw : settings) {
        const Setting s{canonical_name(raw.first), raw.second};
        if (s.first == "hidden_layer_sizes") c.hidden_layer_sizes = parse_layers(s);
        else if (s.first == "activation") c.activation = parse_activation(to_lower(s.second));
        else if (s.first == "alpha") c.alpha = non_negative_real(s);
        else if (s.first == "learning_rate_init") c.learning_rate_init = positive_real(s);
        else if (s.first == "max_iter") c.max_iter = positive_int(s);
        else if (s.first == "random_state") c.random_state = static_cast<std::uint64_t>(parse_int(s.second));
        else if (s.first == "batch_size") c.batch_size = positive_int(s);
        else if (s.first == "solver") {
          if (to_lower(s.second) != "adam") throw InvalidInput("MLP solver must be adam, got '" + s.second + "'");
        } else
          throw InvalidInput("unknown MLP setting '" + raw.first + "'");
      }
      return c;
    }
  }
  throw InvalidInput("unknown model family");
}

std::string describe(const AnyConfig& config) {
  std::ostringstream out;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LRConfig>) {
          out << "C=" << format_double(c.c) << " max_iter=" << c.max_iter
              << " tolerance=" << format_double(c.tolerance) << " penalty=l2";
        } else if constexpr (std::is_same_v<T, SVMConfig>) {
          out << "C=" << format_double(c.c) << " kernel=" << to_string(c.kernel) << " gamma=" << c.gamma.str()
              << " tolerance=" << format_double(c.tolerance) << " max_passes=" << c.max_passes;
        } else {
          std::vector<std::string> sizes;
          for (int h : c.hidden_layer_sizes) sizes.push_back(std::to_string(h));
          out << "hidden_layer_sizes=(" << join(sizes, ",") << ") activation=" << to_string(c.activation)
              << " alpha=" << format_double(c.alpha) << " learning_rate_init=" << format_double(c.learning_rate_init)
              << " max_iter=" << c.max_iter << " random_state=" << c.random_state
              << " batch_size=" << (c.batch_size > 0 ? std::to_string(c.batch_size) : "auto");
        }
      },
      config);
  return out.str();
}

AnyModel fit_model(const Matrix& x, std::span<const int> y, const AnyConfig& config, Task task) {
  return std::visit(
      [&](const auto& c) -> AnyModel {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LRConfig>) return train_lr(x, y, c, task);
        else if constexpr (std::is_same_v<T, SVMConfig>) return train_svm(x, y, c, task);
        else return train_mlp(x, y, c, task);
      },
      config);
}

std::vector<int> predict_labels(const AnyModel& model, const Matrix& x) {
  return std::visit(
      [&](const auto& m) -> std::vector<int> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LRModel>) return predict_lr(m, x).labels;
        else if constexpr (std::is_same_v<T, SVMModel>) return predict_svm(m, x);
        else return predict_mlp(m, x).labels;
      },
      model);
}

Matrix predict_scores(const AnyModel& model, const Matrix& x) {
  return std::visit(
      [&](const auto& m) -> Matrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LRModel>) return predict_lr(m, x).probabilities;
        else if constexpr (std::is_same_v<T, MLPModel>) return predict_mlp(m, x).scores;
        else {
          Matrix out(x.rows(), m.num_classes);
          if (m.num_classes == 2) {
            const auto f = svm_decision_values(m, x);
            for (std::size_t i = 0; i < x.rows(); ++i) {
              out(i, 0) = -f[i];
              out(i, 1) = f[i];
            }
            return out;
          }
          // Vote share per class.
          for (std::size_t i = 0; i < x.rows(); ++i)
            for (const auto& machine : m.machines) {
              const double f = machine.decision(m.kernel, m.gamma, x.row(i));
              out(i, static_cast<std::size_t>(f > 0 ? machine.positive : machine.negative)) +=
                  1.0 / static_cast<double>(m.num_classes - 1);
            }
          return out;
        }
      },
      model);
}

std::size_t GridSpec::cell_count() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<Setting> GridSpec::cell(std::size_t index) const {
  if (index >= cell_count()) throw InvalidInput("grid cell index out of range");
  std::vector<Setting> out(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const auto& axis = axes[a];
    out[a] = {axis.name, axis.values[index % axis.values.size()]};
    index /= axis.values.size();
  }
  return out;
}

GridSpec reference_grid(ModelFamily family) {
  switch (family) {
    case ModelFamily::lr:
      return {family,
              {{"C", {"0.2", "0.3", "0.5", "0.7", "0.8", "1"}},
               {"solver", {"lbfgs", "saga", "liblinear"}},
               {"penalty", {"l2", "elastincnet"}},
               {"max_iter", {"50", "80", "100", "120", "200", "500", "1000"}}}};
    case ModelFamily::svm:
      return {family,
              {{"C", {"0.1", "1", "10"}},
               {"gamma", {"0.1", "1", "10", "scale", "auto"}},
               {"kernel", {"linear", "rbf"}}}};
    case ModelFamily::mlp:
      return {family,
              {{"hidden_layer_sizes", {"(50,)", "(100,)", "(50, 50)"}},
               {"activation", {"identity", "logistic", "relu"}},
               {"alpha", {"0.0001", "0.05"}},
               {"random_state", {"30", "40", "50"}},
               {"solver", {"adam"}},
               {"learning_rate_init", {"0.0001"}},
               {"max_iter", {"200", "300", "1000"}}}};
  }
  throw InvalidInput("unknown model family");
}

std::string to_string(CellStatus status) {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::skipped: return "skipped";
    case CellStatus::failed: return "failed";
  }
  return "?";
}

namespace {

struct FoldData {
  std::vector<std::size_t> fit_rows;  // table rows
  std::vector<std::size_t> eval_rows;
};

std::vector<FoldData> make_folds(std::span<const int> y, std::span<const std::size_t> rows, const CvOptions& options) {
  if (rows.empty()) throw EmptyDataset("cross-validation needs at least one row");
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (auto r : rows) {
    if (r >= y.size()) throw ShapeError("row index outside the table");
    labels.push_back(y[r]);
  }
  const auto splits = kfold(labels, options.folds, options.seed, options.class_names);
  std::vector<FoldData> folds;
  for (const auto& s : splits) {
    FoldData f;
    for (auto i : s.train) f.fit_rows.push_back(rows[i]);
    for (auto i : s.test) f.eval_rows.push_back(rows[i]);
    folds.push_back(std::move(f));
  }
  return folds;
}

struct PreparedFold {
  Matrix fit_x, eval_x;
  std::vector<int> fit_y, eval_y;
};

PreparedFold prepare(const Matrix& x, std::span<const int> y, const FoldData& fold) {
  PreparedFold p;
  const Matrix raw_fit = x.select_rows(fold.fit_rows);
  const Scaler scaler = Scaler::fit(raw_fit);
  p.fit_x = scaler.transform(raw_fit);
  p.eval_x = scaler.transform(x.select_rows(fold.eval_rows));
  p.fit_y = gather(y, std::span<const std::size_t>(fold.fit_rows));
  p.eval_y = gather(y, std::span<const std::size_t>(fold.eval_rows));
  return p;
}

double fraction_correct(std::span<const int> truth, std::span<const int> predicted) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<double> score_folds(const std::vector<PreparedFold>& folds, const AnyConfig& config, Task task) {
  std::vector<double> out;
  for (const auto& f : folds) {
    const auto model = fit_model(f.fit_x, f.fit_y, config, task);
    out.push_back(fraction_correct(f.eval_y, predict_labels(model, f.eval_x)));
  }
  return out;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a;
  return s / static_cast<double>(v.size());
}

std::vector<PreparedFold> prepare_all(const Matrix& x, std::span<const int> y, const std::vector<FoldData>& folds,
                                      const CvOptions& options) {
  std::vector<PreparedFold> out;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    if (options.observer) options.observer(k, folds[k].fit_rows);
    out.push_back(prepare(x, y, folds[k]));
  }
  return out;
}

}  // namespace

std::vector<double> cv_accuracy(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                const AnyConfig& config, Task task, const CvOptions& options) {
  if (x.rows() != y.size()) throw ShapeError("feature/label row count mismatch");
  const auto folds = make_folds(y, rows, options);
  return score_folds(prepare_all(x, y, folds, options), config, task);
}

GridResult grid_search(const GridSpec& grid, const Matrix& x, std::span<const int> y,
                       std::span<const std::size_t> rows, Task task, const CvOptions& options) {
  if (x.rows() != y.size()) throw ShapeError("feature/label row count mismatch");
  const std::size_t cells = grid.cell_count();
  if (cells == 0) throw InvalidInput("grid has no cells");
  const auto folds = prepare_all(x, y, make_folds(y, rows, options), options);

  GridResult result;
  std::map<std::string, std::size_t> seen;  // effective config -> first cell
  std::optional<std::size_t> best;
  std::vector<std::optional<AnyConfig>> configs(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    CellResult cell;
    cell.index = i;
    cell.settings = grid.cell(i);
    if (auto reason = unsupported_reason(grid.family, cell.settings)) {
      cell.status = CellStatus::skipped;
      cell.message = *reason;
      result.cells.push_back(std::move(cell));
      continue;
    }
    try {
      configs[i] = make_config(grid.family, cell.settings);
      const std::string key = describe(*configs[i]);
      if (auto it = seen.find(key); it != seen.end()) {
        const auto& earlier = result.cells[it->second];
        cell.status = earlier.status;
        cell.message = earlier.message;
        cell.fold_accuracy = earlier.fold_accuracy;
        cell.mean_accuracy = earlier.mean_accuracy;
      } else {
        seen.emplace(key, i);
        cell.fold_accuracy = score_folds(folds, *configs[i], task);
        cell.mean_accuracy = mean_of(cell.fold_accuracy);
      }
    } catch (const Error& e) {
      cell.status = CellStatus::failed;
      cell.message = e.what();
    }
    if (cell.status == CellStatus::ok && (!best || cell.mean_accuracy > result.cells[*best].mean_accuracy)) best = i;
    result.cells.push_back(std::move(cell));
  }
  if (!best) {
    std::string detail;
    for (const auto& c : result.cells)
      if (c.status == CellStatus::failed) {
        detail = ": " + c.message;
        break;
      }
    throw TrainingError("no grid cell trained successfully" + detail);
  }
  result.best = *best;
  result.best_config = *configs[*best];
  return result;
}

RFECurve rfe(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
             std::span<const std::string> feature_names, const AnyConfig& config, Task task,
             const CvOptions& options) {
  if (x.rows() != y.size()) throw ShapeError("feature/label row count mismatch");
  if (feature_names.size() != x.cols()) throw ShapeError("feature name count does not match the table width");
  if (x.cols() == 0) throw InvalidInput("RFE needs at least one feature");
  const auto folds = make_folds(y, rows, options);
  for (std::size_t k = 0; k < folds.size(); ++k)
    if (options.observer) options.observer(k, folds[k].fit_rows);

  RFECurve curve;
  curve.ranker = "mean |weight| of an L2 logistic regression (C=1), averaged over folds and logits";
  std::vector<std::size_t> kept(x.cols());
  for (std::size_t j = 0; j < kept.size(); ++j) kept[j] = j;
  const LRConfig surrogate{};

  while (!kept.empty()) {
    const Matrix sub = x.select_cols(kept);
    if (sub.cols() != kept.size()) throw ShapeError("projected width does not match kept feature count");
    std::vector<PreparedFold> prepared;
    for (const auto& f : folds) prepared.push_back(prepare(sub, y, f));

    RFEPoint point;
    point.feature_count = kept.size();
    for (auto j : kept) point.kept_features.push_back(feature_names[j]);
    point.fold_accuracy = score_folds(prepared, config, task);
    point.cv_accuracy = mean_of(point.fold_accuracy);

    if (kept.size() > 1) {
      std::vector<double> importance(kept.size(), 0.0);
      for (const auto& f : prepared) {
        const LRModel m = train_lr(f.fit_x, f.fit_y, surrogate, task);
        for (std::size_t r = 0; r < m.weights.rows(); ++r)
          for (std::size_t j = 0; j < kept.size(); ++j)
            importance[j] += std::abs(m.weights(r, j)) / static_cast<double>(m.weights.rows());
      }
      const auto weakest = static_cast<std::size_t>(std::min_element(importance.begin(), importance.end()) -
                                                    importance.begin());
      point.dropped_feature = feature_names[kept[weakest]];
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(weakest));
    } else {
      kept.clear();
    }
    curve.points.push_back(std::move(point));
  }
  return curve;
}

const RFEPoint& best_point(const RFECurve& curve) {
  if (curve.points.empty()) throw InvalidInput("empty RFE curve");
  const RFEPoint* best = &curve.points.front();
  for (const auto& p : curve.points)
    if (p.cv_accuracy >= best->cv_accuracy) best = &p;
  return *best;
}

}  // namespace aiart
