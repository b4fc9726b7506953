#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "aiart/error.hpp"
#include "aiart/select.hpp"
#include "support.hpp"

using namespace aiart;

namespace {

struct Toy {
  Matrix x;
  std::vector<int> y;
  std::vector<std::size_t> rows;
};

Toy toy(std::uint64_t seed, std::size_t n = 100, std::size_t d = 4, int classes = 2) {
  Rng rng(seed);
  Toy t{Matrix(n, d), std::vector<int>(n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    t.y[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (std::size_t j = 0; j < d; ++j) t.x(i, j) = rng.normal() * 3.0 + 10.0;
    t.x(i, 0) += 4.0 * t.y[i];
    t.rows.push_back(i);
  }
  return t;
}

std::vector<std::string> values_of(const GridSpec& g, const std::string& axis) {
  for (const auto& a : g.axes)
    if (a.name == axis) return a.values;
  return {};
}

}  // namespace

TEST_SUITE("select") {
  TEST_CASE("reference grids enumerate the searched value sets") {
    const auto svm = reference_grid(ModelFamily::svm);
    CHECK(svm.cell_count() == 30);
    CHECK(values_of(svm, "C") == std::vector<std::string>{"0.1", "1", "10"});
    CHECK(values_of(svm, "gamma") == std::vector<std::string>{"0.1", "1", "10", "scale", "auto"});
    CHECK(values_of(svm, "kernel") == std::vector<std::string>{"linear", "rbf"});

    const auto lr = reference_grid(ModelFamily::lr);
    CHECK(lr.cell_count() == 252);
    CHECK(values_of(lr, "C") == std::vector<std::string>{"0.2", "0.3", "0.5", "0.7", "0.8", "1"});
    CHECK(values_of(lr, "solver") == std::vector<std::string>{"lbfgs", "saga", "liblinear"});
    CHECK(values_of(lr, "penalty") == std::vector<std::string>{"l2", "elastincnet"});
    CHECK(values_of(lr, "max_iter") == std::vector<std::string>{"50", "80", "100", "120", "200", "500", "1000"});

    const auto mlp = reference_grid(ModelFamily::mlp);
    CHECK(mlp.cell_count() == 162);
    CHECK(values_of(mlp, "hidden_layer_sizes") == std::vector<std::string>{"(50,)", "(100,)", "(50, 50)"});
    CHECK(values_of(mlp, "activation") == std::vector<std::string>{"identity", "logistic", "relu"});
    CHECK(values_of(mlp, "alpha") == std::vector<std::string>{"0.0001", "0.05"});
    CHECK(values_of(mlp, "random_state") == std::vector<std::string>{"30", "40", "50"});
    CHECK(values_of(mlp, "solver") == std::vector<std::string>{"adam"});
    CHECK(values_of(mlp, "learning_rate_init") == std::vector<std::string>{"0.0001"});
    CHECK(values_of(mlp, "max_iter") == std::vector<std::string>{"200", "300", "1000"});

    for (std::size_t i = 0; i < mlp.cell_count(); ++i) CHECK_NOTHROW(make_config(ModelFamily::mlp, mlp.cell(i)));
  }

  TEST_CASE("cells are row-major, last axis fastest") {
    const auto svm = reference_grid(ModelFamily::svm);
    const auto c0 = svm.cell(0), c1 = svm.cell(1), c2 = svm.cell(2), last = svm.cell(29);
    CHECK(c0 == std::vector<Setting>{{"C", "0.1"}, {"gamma", "0.1"}, {"kernel", "linear"}});
    CHECK(c1[2].second == "rbf");
    CHECK(c2[1].second == "1");
    CHECK(last == std::vector<Setting>{{"C", "10"}, {"gamma", "auto"}, {"kernel", "rbf"}});
    CHECK_THROWS_AS(svm.cell(30), InvalidInput);
  }

  TEST_CASE("config parsing") {
    const std::vector<Setting> s{{"C", "10"}, {"gamma", "auto"}, {"kernel", "rbf"}};
    const auto cfg = std::get<SVMConfig>(make_config(ModelFamily::svm, s));
    CHECK(cfg.c == 10.0);
    CHECK(cfg.gamma.kind == Gamma::Kind::automatic);
    const std::vector<Setting> layers{{"hidden_layer_sizes", "(50, 50)"}};
    CHECK(std::get<MLPConfig>(make_config(ModelFamily::mlp, layers)).hidden_layer_sizes == std::vector<int>{50, 50});
    const std::vector<Setting> unknown{{"depth", "3"}};
    CHECK_THROWS_AS(make_config(ModelFamily::svm, unknown), InvalidInput);
    const std::vector<Setting> negative{{"C", "-1"}};
    CHECK_THROWS_AS(make_config(ModelFamily::lr, negative), InvalidInput);
    const std::vector<Setting> elastic{{"penalty", "elastincnet"}};
    CHECK(unsupported_reason(ModelFamily::lr, elastic).has_value());
    CHECK_THROWS_AS(make_config(ModelFamily::lr, elastic), InvalidInput);
    const std::vector<Setting> solver_a{{"solver", "saga"}}, solver_b{{"solver", "lbfgs"}};
    CHECK(describe(make_config(ModelFamily::lr, solver_a)) == describe(make_config(ModelFamily::lr, solver_b)));
  }

  TEST_CASE("single-config grid returns that config") {
    const auto t = toy(1);
    GridSpec g{ModelFamily::svm, {{"C", {"3"}}, {"kernel", {"linear"}}}};
    const auto r = grid_search(g, t.x, t.y, t.rows, Task::binary, {});
    CHECK(r.cells.size() == 1);
    CHECK(r.best == 0);
    CHECK(std::get<SVMConfig>(r.best_config).c == 3.0);
  }

  TEST_CASE("duplicate configs tie and the first wins") {
    const auto t = toy(2);
    GridSpec g{ModelFamily::lr, {{"C", {"0.5", "0.5"}}}};
    const auto r = grid_search(g, t.x, t.y, t.rows, Task::binary, {});
    CHECK(r.cells[0].fold_accuracy == r.cells[1].fold_accuracy);
    CHECK(r.best == 0);
  }

  TEST_CASE("grid search is deterministic and never fits on held-out rows") {
    const auto t = toy(3, 150, 5, 3);
    const std::vector<double> ratios{0.8, 0.2};
    const auto split = stratified_split(t.y, ratios, 11);
    const std::set<std::size_t> test_rows(split.test.begin(), split.test.end());
    std::size_t observed = 0;
    bool leaked = false;
    CvOptions options;
    options.seed = 11;
    options.observer = [&](std::size_t, std::span<const std::size_t> fit_rows) {
      ++observed;
      for (auto r : fit_rows) leaked = leaked || test_rows.count(r) > 0;
    };
    const auto grid = reference_grid(ModelFamily::svm);
    const auto a = grid_search(grid, t.x, t.y, split.train, Task::multiclass, options);
    CHECK(observed == 5);
    CHECK_FALSE(leaked);
    const auto b = grid_search(grid, t.x, t.y, split.train, Task::multiclass, options);
    REQUIRE(a.cells.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) CHECK(a.cells[i].fold_accuracy == b.cells[i].fold_accuracy);
    CHECK(a.best == b.best);
    const auto& best = a.cells[a.best];
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(a.cells[i].mean_accuracy <= best.mean_accuracy);
      if (i < a.best) CHECK(a.cells[i].mean_accuracy < best.mean_accuracy);
    }
  }

  TEST_CASE("LR reference grid skips the elastic-net cells") {
    const auto t = toy(4, 60, 3);
    const auto r = grid_search(reference_grid(ModelFamily::lr), t.x, t.y, t.rows, Task::binary, {});
    std::size_t skipped = 0, ok = 0;
    for (const auto& c : r.cells) {
      if (c.status == CellStatus::skipped) {
        ++skipped;
        CHECK(c.settings[2].second == "elastincnet");
      }
      ok += c.status == CellStatus::ok;
    }
    CHECK(skipped == 126);
    CHECK(ok == 126);
  }

  TEST_CASE("training failures are recorded per cell") {
    // An out-of-domain value fails its own cell only.
    const auto t = toy(5);
    GridSpec g{ModelFamily::svm, {{"gamma", {"-1", "auto"}}}};
    const auto r = grid_search(g, t.x, t.y, t.rows, Task::binary, {});
    CHECK(r.cells[0].status == CellStatus::failed);
    CHECK(r.cells[1].status == CellStatus::ok);
    CHECK(r.best == 1);
    GridSpec bad{ModelFamily::svm, {{"gamma", {"-1"}}}};
    CHECK_THROWS_AS(grid_search(bad, t.x, t.y, t.rows, Task::binary, {}), TrainingError);
  }

  TEST_CASE("rfe curve structure and consistency") {
    Rng rng(6);
    const std::size_t n = 120, d = 39;
    Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
      y[i] = x(i, 5) - x(i, 17) > 0 ? 1 : 0;
    }
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
    const AnyConfig cfg = LRConfig{};
    CvOptions options;
    options.seed = 3;
    const auto curve = rfe(x, y, rows, names, cfg, Task::binary, options);
    REQUIRE(curve.points.size() == 39);
    std::set<std::string> dropped;
    for (std::size_t k = 0; k < 39; ++k) {
      CHECK(curve.points[k].feature_count == 39 - k);
      CHECK(curve.points[k].kept_features.size() == 39 - k);
      if (k < 38) dropped.insert(curve.points[k].dropped_feature);
    }
    CHECK(dropped.size() == 38);
    CHECK(curve.points.back().dropped_feature.empty());
    const auto full = cv_accuracy(x, y, rows, cfg, Task::binary, options);
    double mean = 0.0;
    for (double v : full) mean += v;
    mean /= static_cast<double>(full.size());
    CHECK(std::abs(curve.points.front().cv_accuracy - mean) <= 1e-12);

    const auto again = rfe(x, y, rows, names, cfg, Task::binary, options);
    for (std::size_t k = 0; k < 39; ++k) {
      CHECK(again.points[k].kept_features == curve.points[k].kept_features);
      CHECK(again.points[k].cv_accuracy == curve.points[k].cv_accuracy);
    }
    const auto& last_two = curve.points[37].kept_features;
    CHECK(std::find(last_two.begin(), last_two.end(), "f5") != last_two.end());
    CHECK(std::find(last_two.begin(), last_two.end(), "f17") != last_two.end());
  }
}
