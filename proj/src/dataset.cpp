#include "aiart/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aiart/error.hpp"
#include "aiart/rng.hpp"
#include "aiart/textio.hpp"

namespace aiart {

namespace fs = std::filesystem;

Manifest scan(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IOError("cannot read dataset root " + root.string());
  Manifest manifest;
  std::vector<fs::path> class_dirs;
  for (fs::directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec))
    if (it->is_directory()) class_dirs.push_back(it->path());
  if (ec) throw IOError("cannot list " + root.string() + ": " + ec.message());
  std::sort(class_dirs.begin(), class_dirs.end());

  for (const auto& dir : class_dirs) {
    const int label = static_cast<int>(manifest.class_names.size());
    manifest.class_names.push_back(dir.filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (has_image_extension(entry.path()))
        files.push_back(entry.path());
      else
        manifest.warnings.push_back("skipping non-image file " + entry.path().string());
    }
    if (files.empty()) manifest.warnings.push_back("class directory " + dir.string() + " has no images");
    std::sort(files.begin(), files.end());
    for (auto& f : files) manifest.entries.push_back({std::move(f), label});
  }
  return manifest;
}

int binary_label_for(std::string_view class_name) {
  return to_lower(class_name.substr(0, 3)) == "ai-" ? 1 : 0;
}

std::vector<std::string> canonical_feature_names() {
  return {kFeatureNames.begin(), kFeatureNames.end()};
}

Matrix FeatureTable::matrix() const {
  Matrix m(rows.size(), feature_names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].features.size() != feature_names.size()) throw ShapeError("feature row width mismatch");
    std::copy(rows[i].features.begin(), rows[i].features.end(), m.row(i).begin());
  }
  return m;
}

std::vector<int> FeatureTable::class_labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.class_label);
  return out;
}

std::vector<int> FeatureTable::binary_labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.binary_label);
  return out;
}

FeatureTable FeatureTable::project(std::span<const std::string> names) const {
  std::vector<std::size_t> columns;
  for (const auto& name : names) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw ShapeError("unknown feature column '" + name + "'");
    columns.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  FeatureTable out{{names.begin(), names.end()}, class_names, {}};
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    FeatureRow row{{}, r.class_label, r.binary_label, r.path};
    for (auto c : columns) row.features.push_back(r.features[c]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string format_feature_csv(const FeatureTable& table) {
  std::string out;
  for (const auto& name : table.feature_names) out += name + ",";
  out += "class_label,binary_label,path\n";
  for (const auto& row : table.rows) {
    for (double v : row.features) out += format_double(v) + ",";
    out += csv_escape(table.class_names.at(static_cast<std::size_t>(row.class_label))) + ",";
    out += std::to_string(row.binary_label) + ",";
    out += csv_escape(row.path) + "\n";
  }
  return out;
}

void write_feature_csv(const FeatureTable& table, const fs::path& path) {
  write_text_file(path, format_feature_csv(table));
}

FeatureTable read_feature_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path.string() + ": empty feature CSV");
  auto header = csv_split(line);
  if (header.size() < 4 || header[header.size() - 3] != "class_label" ||
      header[header.size() - 2] != "binary_label" || header.back() != "path")
    throw InvalidInput(path.string() + ": header must end with class_label,binary_label,path");
  const std::size_t width = header.size() - 3;

  FeatureTable table;
  table.feature_names.assign(header.begin(), header.begin() + static_cast<long>(width));
  std::vector<std::string> row_classes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = csv_split(line);
    if (fields.size() != header.size())
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields");
    FeatureRow row;
    row.features.reserve(width);
    for (std::size_t j = 0; j < width; ++j) row.features.push_back(parse_double(fields[j]));
    row.binary_label = static_cast<int>(parse_int(fields[width + 1]));
    row.path = fields[width + 2];
    row_classes.push_back(fields[width]);
    table.rows.push_back(std::move(row));
  }
  table.class_names = row_classes;
  std::sort(table.class_names.begin(), table.class_names.end());
  table.class_names.erase(std::unique(table.class_names.begin(), table.class_names.end()),
                          table.class_names.end());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto it = std::lower_bound(table.class_names.begin(), table.class_names.end(), row_classes[i]);
    table.rows[i].class_label = static_cast<int>(it - table.class_names.begin());
  }
  return table;
}

fs::path sidecar_path(const fs::path& csv_path) {
  fs::path out = csv_path;
  out += ".meta.json";
  return out;
}

namespace {

nlohmann::ordered_json extractor_json(const ExtractorConfig& c) {
  return {{"resize_side", c.resize_side},
          {"canny_low", c.canny.low},
          {"canny_high", c.canny.high},
          {"canny_sigma", c.canny.sigma},
          {"glcm_levels", c.glcm_levels},
          {"glcm_offset", "distance 1, angle 0, symmetric"},
          {"lbp", "8 neighbours, radius 1, neighbour >= centre"},
          {"hog", "9 bins, 8x8 cells, 2x2 blocks, L2 eps 1e-6"},
          {"entropy_unit", "bits"}};
}

}  // namespace

std::string extractor_fingerprint(const ExtractorConfig& config) { return extractor_json(config).dump(); }

std::optional<ExtractorConfig> read_sidecar_extractor(const fs::path& csv_path) {
  std::error_code ec;
  if (!fs::exists(sidecar_path(csv_path), ec)) return std::nullopt;
  try {
    const auto meta = nlohmann::json::parse(read_text_file(sidecar_path(csv_path))).at("extractor");
    ExtractorConfig c;
    c.resize_side = meta.at("resize_side").get<int>();
    c.canny.low = meta.at("canny_low").get<double>();
    c.canny.high = meta.at("canny_high").get<double>();
    c.canny.sigma = meta.at("canny_sigma").get<double>();
    c.glcm_levels = meta.at("glcm_levels").get<int>();
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

namespace {

struct CachedRows {
  std::map<std::string, FeatureRow> rows;
  std::map<std::string, std::string> hashes;
};

std::optional<CachedRows> load_cache(const fs::path& csv, const ExtractorConfig& config) {
  std::error_code ec;
  if (!fs::exists(csv, ec) || !fs::exists(sidecar_path(csv), ec)) return std::nullopt;
  try {
    const auto meta = nlohmann::json::parse(read_text_file(sidecar_path(csv)));
    if (meta.at("extractor") != nlohmann::json(extractor_json(config))) return std::nullopt;
    const auto table = read_feature_csv(csv);
    if (table.feature_names != canonical_feature_names()) return std::nullopt;
    CachedRows cache;
    for (const auto& [path, hash] : meta.at("files").items()) cache.hashes[path] = hash.get<std::string>();
    for (const auto& row : table.rows) cache.rows[row.path] = row;
    return cache;
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring unreadable feature cache " << csv << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& w : workers) w.join();
}

}  // namespace

FeatureTable build_feature_table(const Manifest& manifest, const fs::path& cache_csv,
                                 const BuildOptions& options, BuildReport* report) {
  std::optional<CachedRows> cache;
  if (!cache_csv.empty()) cache = load_cache(cache_csv, options.extractor);

  const std::size_t n = manifest.entries.size();
  struct Slot {
    std::optional<FeatureVector> features;
    std::string hash;
    std::string error;
    bool from_cache = false;
  };
  std::vector<Slot> slots(n);

  parallel_for(n, options.threads, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const std::string key = entry.path.string();
    Slot& slot = slots[i];
    try {
      const auto bytes = read_file_bytes(entry.path);
      slot.hash = hex64(fnv1a64(bytes));
      if (cache) {
        const auto h = cache->hashes.find(key);
        const auto r = cache->rows.find(key);
        if (h != cache->hashes.end() && h->second == slot.hash && r != cache->rows.end() &&
            r->second.features.size() == kFeatureCount) {
          FeatureVector v{};
          std::copy(r->second.features.begin(), r->second.features.end(), v.begin());
          slot.features = v;
          slot.from_cache = true;
          return;
        }
      }
      slot.features = extract_all(decode(bytes, key), options.extractor);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  FeatureTable table{canonical_feature_names(), manifest.class_names, {}};
  BuildReport local;
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = manifest.entries[i];
    auto& slot = slots[i];
    if (!slot.features) {
      local.failures.push_back({entry.path.string(), slot.error});
      continue;
    }
    (slot.from_cache ? local.cached : local.extracted)++;
    const auto& name = manifest.class_names[static_cast<std::size_t>(entry.class_label)];
    table.rows.push_back({{slot.features->begin(), slot.features->end()},
                          entry.class_label,
                          binary_label_for(name),
                          entry.path.string()});
    files[entry.path.string()] = slot.hash;
  }
  if (report) *report = local;
  if (table.rows.empty()) throw EmptyDataset("no image in the manifest could be decoded");

  if (!cache_csv.empty()) {
    write_feature_csv(table, cache_csv);
    nlohmann::ordered_json meta;
    meta["format"] = "aiart-feature-cache";
    meta["format_version"] = 1;
    meta["extractor"] = extractor_json(options.extractor);
    meta["seed"] = options.seed;
    meta["class_names"] = manifest.class_names;
    meta["files"] = files;
    write_text_file(sidecar_path(cache_csv), meta.dump(2) + "\n");
  }
  return table;
}

namespace {

std::string class_name_or_index(std::span<const std::string> names, int label) {
  if (label >= 0 && static_cast<std::size_t>(label) < names.size()) return names[static_cast<std::size_t>(label)];
  return "#" + std::to_string(label);
}

std::map<int, std::vector<std::size_t>> members_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  return members;
}

}  // namespace

SplitIndex stratified_split(std::span<const int> labels, std::span<const double> ratios,
                            std::uint64_t seed, std::span<const std::string> class_names) {
  if (ratios.size() < 2 || ratios.size() > 3) throw InvalidInput("split needs 2 or 3 ratios");
  const double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("split ratios must sum to 1");
  for (double r : ratios)
    if (r <= 0.0) throw InvalidInput("split ratios must be positive");

  SplitIndex split;
  split.seed = seed;
  std::vector<std::size_t>* parts[3] = {&split.train, &split.test, &split.validation};
  Rng rng(seed);
  for (auto& [label, members] : members_by_class(labels)) {
    rng.shuffle(std::span(members));
    const auto n = static_cast<double>(members.size());
    std::vector<std::size_t> counts(ratios.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < ratios.size(); ++p) {
      const double exact = n * ratios[p];
      counts[p] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[p];
      remainders.emplace_back(exact - std::floor(exact), p);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < members.size(); ++r, ++assigned) ++counts[remainders[r].second];
    for (std::size_t p = 0; p < ratios.size(); ++p)
      if (counts[p] == 0)
        throw StratificationError("class '" + class_name_or_index(class_names, label) +
                                  "' is too small for the requested split (" +
                                  std::to_string(members.size()) + " samples)");
    std::size_t offset = 0;
    for (std::size_t p = 0; p < ratios.size(); ++p) {
      parts[p]->insert(parts[p]->end(), members.begin() + static_cast<long>(offset),
                       members.begin() + static_cast<long>(offset + counts[p]));
      offset += counts[p];
    }
  }
  for (auto* part : parts) std::sort(part->begin(), part->end());
  return split;
}

std::vector<SplitIndex> kfold(std::span<const int> labels, int k, std::uint64_t seed,
                              std::span<const std::string> class_names) {
  if (k < 2) throw InvalidInput("k-fold needs k >= 2");
  const auto folds_n = static_cast<std::size_t>(k);
  std::vector<int> fold_of(labels.size(), -1);
  Rng rng(seed);
  std::size_t offset = 0;
  for (auto& [label, members] : members_by_class(labels)) {
    if (members.size() < folds_n)
      throw StratificationError("class '" + class_name_or_index(class_names, label) + "' has " +
                                std::to_string(members.size()) + " samples, fewer than k=" +
                                std::to_string(k));
    rng.shuffle(std::span(members));
    // Deal round-robin, continuing where the previous class stopped so fold
    // totals stay balanced as well.
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of[members[i]] = static_cast<int>((offset + i) % folds_n);
    offset = (offset + members.size()) % folds_n;
  }
  std::vector<SplitIndex> folds(folds_n);
  for (auto& f : folds) f.seed = seed;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t f = 0; f < folds_n; ++f)
      (static_cast<std::size_t>(fold_of[i]) == f ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

}  // namespace aiart
