#include "aiart/eval.hpp"

#include <sstream>

#include "aiart/dataset.hpp"
#include "aiart/error.hpp"
#include "aiart/textio.hpp"

namespace aiart {

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw ShapeError("accuracy: " + std::to_string(truth.size()) + " labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  if (truth.empty()) throw ShapeError("accuracy of an empty sequence");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

long ConfusionMatrix::total() const {
  long n = 0;
  for (const auto& row : counts)
    for (long v : row) n += v;
  return n;
}

long ConfusionMatrix::trace() const {
  long n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
  return n;
}

long ConfusionMatrix::row_total(std::size_t row) const {
  long n = 0;
  for (long v : counts.at(row)) n += v;
  return n;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          std::vector<std::string> labels) {
  if (truth.size() != predicted.size()) throw ShapeError("confusion: label and prediction counts differ");
  const std::size_t k = labels.size();
  ConfusionMatrix m{std::move(labels), std::vector<std::vector<long>>(k, std::vector<long>(k, 0))};
  auto check = [&](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= k)
      throw LabelError("label " + std::to_string(v) + " is not one of the " + std::to_string(k) + " known classes");
    return static_cast<std::size_t>(v);
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.counts[check(truth[i])][check(predicted[i])];
  return m;
}

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& matrix) {
  std::vector<ClassMetrics> out;
  const std::size_t k = matrix.labels.size();
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.label = matrix.labels[c];
    m.support = matrix.row_total(c);
    long predicted = 0;
    for (std::size_t r = 0; r < k; ++r) predicted += matrix.counts[r][c];
    const long hit = matrix.counts[c][c];
    m.precision = predicted > 0 ? static_cast<double>(hit) / static_cast<double>(predicted) : 0.0;
    m.recall = m.support > 0 ? static_cast<double>(hit) / static_cast<double>(m.support) : 0.0;
    out.push_back(m);
  }
  return out;
}

ProvenanceErrors provenance_errors(const ConfusionMatrix& matrix) {
  ProvenanceErrors e;
  const std::size_t k = matrix.labels.size();
  for (std::size_t r = 0; r < k; ++r) {
    if (binary_label_for(matrix.labels[r]) == 1) continue;
    for (std::size_t c = 0; c < k; ++c) {
      if (c == r) continue;
      (binary_label_for(matrix.labels[c]) == 1 ? e.human_as_ai : e.within_human) += matrix.counts[r][c];
    }
  }
  return e;
}

std::string extractor_hash(const ExtractorConfig& config) { return hex64(fnv1a64(extractor_fingerprint(config))); }

std::string format_epochs_csv(std::span<const EpochMetrics> epochs) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& e : epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," + format_double(e.train_acc) + "," +
           format_double(e.val_loss) + "," + format_double(e.val_acc) + "\n";
  return out;
}

std::string format_rfe_csv(const RFECurve& curve) {
  std::string out = "feature_count,cv_accuracy,dropped_feature,kept_features\n";
  for (const auto& p : curve.points)
    out += std::to_string(p.feature_count) + "," + format_double(p.cv_accuracy) + "," +
           csv_escape(p.dropped_feature) + "," + csv_escape(join(p.kept_features, ";")) + "\n";
  return out;
}

namespace {

std::string confusion_csv(const ConfusionMatrix& m) {
  std::string out = "true\\predicted";
  for (const auto& l : m.labels) out += "," + csv_escape(l);
  out += "\n";
  for (std::size_t r = 0; r < m.labels.size(); ++r) {
    out += csv_escape(m.labels[r]);
    for (long v : m.counts[r]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string accuracy_csv(const ExperimentReport& r) {
  std::string out = "scope,accuracy,precision,recall,support\n";
  out += "cv_mean," + format_double(r.cv_mean_accuracy) + ",,,\n";
  out += "test," + format_double(r.test_accuracy) + ",,," + std::to_string(r.confusion.total()) + "\n";
  for (const auto& m : class_metrics(r.confusion))
    out += csv_escape("class:" + m.label) + ",," + format_double(m.precision) + "," + format_double(m.recall) + "," +
           std::to_string(m.support) + "\n";
  return out;
}

std::string grid_csv(std::span<const CellResult> cells) {
  std::size_t folds = 0;
  for (const auto& c : cells) folds = std::max(folds, c.fold_accuracy.size());
  std::string out = "cell";
  if (!cells.empty())
    for (const auto& s : cells.front().settings) out += "," + csv_escape(s.first);
  out += ",status";
  for (std::size_t k = 0; k < folds; ++k) out += ",fold" + std::to_string(k + 1);
  out += ",mean_accuracy,message\n";
  for (const auto& c : cells) {
    out += std::to_string(c.index);
    for (const auto& s : c.settings) out += "," + csv_escape(s.second);
    out += "," + to_string(c.status);
    for (std::size_t k = 0; k < folds; ++k)
      out += "," + (k < c.fold_accuracy.size() ? format_double(c.fold_accuracy[k]) : std::string());
    out += "," + (c.status == CellStatus::ok ? format_double(c.mean_accuracy) : std::string());
    out += "," + csv_escape(c.message) + "\n";
  }
  return out;
}

std::string summary_text(const ExperimentReport& r) {
  std::ostringstream out;
  out << "task: " << to_string(r.task) << "\n";
  out << "model: " << r.model_family << "\n";
  out << "config: " << r.best_config << "\n";
  out << "seed: " << r.seed << "\n";
  out << "extractor config hash: " << r.extractor_config_hash << "\n";
  if (!r.feature_names.empty()) out << "features (" << r.feature_names.size() << "): " << join(r.feature_names, ", ") << "\n";
  out << "cv mean accuracy: " << format_double(r.cv_mean_accuracy) << "\n";
  out << "test accuracy: " << format_double(r.test_accuracy) << " (" << r.confusion.trace() << "/"
      << r.confusion.total() << ")\n";
  if (!r.grid.empty()) {
    std::size_t ok = 0, skipped = 0, failed = 0;
    for (const auto& c : r.grid)
      (c.status == CellStatus::ok ? ok : c.status == CellStatus::skipped ? skipped : failed)++;
    out << "grid: " << r.grid.size() << " cells (" << ok << " trained, " << skipped << " skipped, " << failed
        << " failed)\n";
  }

  out << "\nconfusion matrix (rows = true, columns = predicted):\n";
  std::size_t width = 6;
  for (const auto& l : r.confusion.labels) width = std::max(width, l.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  out << pad("", width);
  for (const auto& l : r.confusion.labels) out << " " << pad(l, width);
  out << "\n";
  for (std::size_t i = 0; i < r.confusion.labels.size(); ++i) {
    out << pad(r.confusion.labels[i], width);
    for (long v : r.confusion.counts[i]) out << " " << pad(std::to_string(v), width);
    out << "\n";
  }

  out << "\nper class (supplementary):\n";
  for (const auto& m : class_metrics(r.confusion))
    out << "  " << m.label << ": precision " << format_double(m.precision) << ", recall " << format_double(m.recall)
        << ", support " << m.support << "\n";

  if (r.rfe_curve) {
    const auto& best = best_point(*r.rfe_curve);
    out << "\nfeature elimination (accuracies are cross-validation means; ranking by " << r.rfe_curve->ranker
        << "):\n";
    out << "  best: " << best.feature_count << " features, cv accuracy " << format_double(best.cv_accuracy) << "\n";
    for (const auto& p : r.rfe_curve->points)
      out << "  " << pad(std::to_string(p.feature_count), 3) << "  " << format_double(p.cv_accuracy)
          << (p.dropped_feature.empty() ? "" : "  then drop " + p.dropped_feature) << "\n";
  }
  if (!r.epochs.empty()) {
    out << "\nepochs:\n";
    for (const auto& e : r.epochs)
      out << "  " << e.epoch << ": train loss " << format_double(e.train_loss) << " acc "
          << format_double(e.train_acc) << ", val loss " << format_double(e.val_loss) << " acc "
          << format_double(e.val_acc) << "\n";
  }
  if (!r.notes.empty()) {
    out << "\nnotes:\n";
    for (const auto& n : r.notes) out << "  " << n << "\n";
  }
  return out.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> render_report(const ExperimentReport& report) {
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("summary.txt", summary_text(report));
  files.emplace_back("accuracy.csv", accuracy_csv(report));
  files.emplace_back("confusion.csv", confusion_csv(report.confusion));
  if (!report.grid.empty()) files.emplace_back("grid.csv", grid_csv(report.grid));
  if (report.rfe_curve) files.emplace_back("rfe_curve.csv", format_rfe_csv(*report.rfe_curve));
  if (!report.epochs.empty()) files.emplace_back("epochs.csv", format_epochs_csv(report.epochs));
  return files;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& directory) {
  for (const auto& [name, content] : render_report(report)) write_text_file(directory / name, content);
}

}  // namespace aiart
